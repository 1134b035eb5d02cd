// SPDX-License-Identifier: MIT
//
// Unit tests for the gated-projection estimator: hand-worked updates, the
// deadzone gate on both sides of its threshold, the per-step motion bound,
// the squared-error descent inequality, and the box/freeze invariants.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include <dstep/estimator.hpp>

using namespace dstep;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

EstimatorConfig wide_config(Eigen::VectorXd theta0, double delta = kInf) {
    EstimatorConfig cfg;
    const Eigen::Index dim = theta0.size();
    cfg.S.lower = Eigen::VectorXd::Constant(dim, -10.0);
    cfg.S.upper = Eigen::VectorXd::Constant(dim, 10.0);
    cfg.S.gain_index = dim - 1;
    cfg.S.lower(cfg.S.gain_index) = 0.5;  // sign-definite gain coordinate
    cfg.delta = delta;
    cfg.theta0 = std::move(theta0);
    cfg.validate_and_project();
    return cfg;
}

}  // namespace

TEST_CASE("estimator_update hand example (no gate, no projection)") {
    Eigen::Vector2d theta_prev(0.0, 1.0);
    Eigen::Vector2d phi(3.0, 4.0);  // ||phi||^2 = 25
    const double y_next = 9.0;      // e = 9 - 4 = 5
    const EstimatorConfig cfg = wide_config(theta_prev);

    const EstimatorStep step = estimator_update(theta_prev, phi, y_next, cfg);
    CHECK(step.e == doctest::Approx(5.0));
    CHECK(step.rho == 1.0);
    CHECK(step.nu == doctest::Approx(1.0));  // |e|/||phi|| = 5/5
    CHECK(step.theta_check(0) == doctest::Approx(0.0 + 3.0 / 25.0 * 5.0));
    CHECK(step.theta_check(1) == doctest::Approx(1.0 + 4.0 / 25.0 * 5.0));
    // Inside the wide box the projection is the identity.
    CHECK((step.theta_hat - step.theta_check).norm() == 0.0);
    CHECK(prediction_error(phi, theta_prev, y_next) == doctest::Approx(5.0));
}

TEST_CASE("projection clamps the post-step estimate into the box") {
    Eigen::VectorXd theta_prev(1);
    theta_prev << 2.0;
    EstimatorConfig cfg;
    cfg.S.lower = Eigen::VectorXd::Constant(1, 1.0);
    cfg.S.upper = Eigen::VectorXd::Constant(1, 3.0);
    cfg.S.gain_index = 0;
    cfg.theta0 = theta_prev;
    cfg.validate_and_project();

    Eigen::VectorXd phi(1);
    phi << 1.0;
    // e = 10 - 2 = 8 pushes theta_check to 10; the box caps it at 3.
    const EstimatorStep step = estimator_update(theta_prev, phi, 10.0, cfg);
    CHECK(step.theta_check(0) == doctest::Approx(10.0));
    CHECK(step.theta_hat(0) == doctest::Approx(3.0));
}

TEST_CASE("deadzone gate switches strictly at its threshold") {
    // Box norm: corner maxima (10, 10) -> sqrt(200); threshold is
    // (2*||S|| + delta)*||phi||, and the gate requires |e| strictly below.
    Eigen::Vector2d theta_prev(0.0, 1.0);
    const double delta = 0.5;
    const EstimatorConfig cfg = wide_config(theta_prev, delta);
    const double box = std::sqrt(200.0);

    Eigen::Vector2d phi(0.6, -0.8);  // unit norm
    const double threshold = 2.0 * box + delta;
    const double phi_dot_theta = phi.dot(theta_prev);

    const EstimatorStep below = estimator_update(
        theta_prev, phi, phi_dot_theta + 0.999 * threshold, cfg);
    CHECK(below.rho == 1.0);
    CHECK(below.nu > 0.0);

    const EstimatorStep above = estimator_update(
        theta_prev, phi, phi_dot_theta + 1.001 * threshold, cfg);
    CHECK(above.rho == 0.0);
    CHECK(above.nu == 0.0);
    CHECK((above.theta_hat - theta_prev).norm() == 0.0);  // frozen

    // Exactly at the threshold the strict inequality fails.
    const EstimatorStep at = estimator_update(
        theta_prev, phi, phi_dot_theta + threshold, cfg);
    CHECK(at.rho == 0.0);
}

TEST_CASE("infinite delta gates off only the zero regressor") {
    Eigen::Vector2d theta_prev(1.0, 1.0);
    const EstimatorConfig cfg = wide_config(theta_prev);

    const EstimatorStep live = estimator_update(
        theta_prev, Eigen::Vector2d(1e-9, 0.0), 1e6, cfg);
    CHECK(live.rho == 1.0);  // huge relative error, still no deadzone

    const EstimatorStep frozen = estimator_update(
        theta_prev, Eigen::Vector2d(0.0, 0.0), 1.0, cfg);
    CHECK(frozen.rho == 0.0);
    CHECK(frozen.nu == 0.0);
    CHECK((frozen.theta_hat - theta_prev).norm() == 0.0);
}

TEST_CASE("numerical floor suppresses updates on tiny regressors") {
    Eigen::Vector2d theta_prev(1.0, 1.0);
    EstimatorConfig cfg = wide_config(theta_prev);
    cfg.min_phi_norm = 1e-6;

    const EstimatorStep under = estimator_update(
        theta_prev, Eigen::Vector2d(1e-7, 0.0), 5.0, cfg);
    CHECK(under.rho == 0.0);
    CHECK(under.nu == 0.0);
    CHECK((under.theta_hat - theta_prev).norm() == 0.0);

    const EstimatorStep over = estimator_update(
        theta_prev, Eigen::Vector2d(1e-5, 0.0), 5.0, cfg);
    CHECK(over.rho == 1.0);
}

TEST_CASE("per-step motion obeys the recorded update magnitude") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> coord(-3.0, 3.0);
    Eigen::VectorXd theta = Eigen::Vector4d(0.0, 0.0, 0.0, 2.0);
    EstimatorConfig cfg = wide_config(theta, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        Eigen::VectorXd phi(4);
        for (int i = 0; i < 4; ++i) phi(i) = coord(rng);
        const double y_next = coord(rng);
        const EstimatorStep step = estimator_update(theta, phi, y_next, cfg);
        const double motion = (step.theta_hat - theta).norm();
        const double bound =
            phi.norm() > 0.0 ? step.rho * std::abs(step.e) / phi.norm() : 0.0;
        CHECK(motion <= bound + 1e-10);
        CHECK(step.nu == doctest::Approx(bound));
        // The estimate never leaves the box.
        for (int i = 0; i < 4; ++i) {
            CHECK(step.theta_hat(i) >= cfg.S.lower(i));
            CHECK(step.theta_hat(i) <= cfg.S.upper(i));
        }
        theta = step.theta_hat;
    }
}

TEST_CASE("squared-error descent inequality for in-box truths") {
    // When y_next = phi.theta_star + wbar and theta_star lies in the box,
    // V = ||theta_hat - theta_star||^2 obeys
    //   V_next - V_prev <= rho*(-e^2/2 + 2*wbar^2)/||phi||^2.
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> coord(-2.0, 2.0);
    std::uniform_real_distribution<double> noise(-0.5, 0.5);
    for (int trial = 0; trial < 500; ++trial) {
        Eigen::VectorXd theta_star(3), theta_prev(3), phi(3);
        for (int i = 0; i < 3; ++i) {
            theta_star(i) = coord(rng);
            theta_prev(i) = coord(rng);
            phi(i) = coord(rng);
        }
        theta_star(2) = std::abs(theta_star(2)) + 0.6;  // gain coordinate
        theta_prev(2) = std::abs(theta_prev(2)) + 0.6;
        EstimatorConfig cfg;
        cfg.S.lower = Eigen::Vector3d(-2.0, -2.0, 0.5);
        cfg.S.upper = Eigen::Vector3d(2.0, 2.0, 3.0);
        cfg.S.gain_index = 2;
        cfg.delta = (trial % 2 == 0) ? 1.0 : kInf;
        cfg.theta0 = theta_prev;
        cfg.validate_and_project();
        const double wb = noise(rng);
        const double y_next = phi.dot(theta_star) + wb;

        const EstimatorStep step =
            estimator_update(cfg.theta0, phi, y_next, cfg);
        const double v_prev = lyapunov(cfg.theta0, theta_star);
        const double v_next = lyapunov(step.theta_hat, theta_star);
        if (phi.norm() > 0.0) {
            const double rhs = step.rho *
                               (-0.5 * step.e * step.e + 2.0 * wb * wb) /
                               phi.squaredNorm();
            CHECK(v_next - v_prev <= rhs + 1e-9);
        } else {
            CHECK(v_next == doctest::Approx(v_prev));
        }
    }
}

TEST_CASE("validate_and_project pulls the initial estimate into the box") {
    EstimatorConfig cfg;
    cfg.S.lower = Eigen::Vector2d(-1.0, 1.0);
    cfg.S.upper = Eigen::Vector2d(1.0, 2.0);
    cfg.S.gain_index = 1;
    cfg.theta0 = Eigen::Vector2d(5.0, 0.0);
    cfg.validate_and_project();
    CHECK(cfg.theta0(0) == doctest::Approx(1.0));
    CHECK(cfg.theta0(1) == doctest::Approx(1.0));

    EstimatorConfig bad = cfg;
    bad.delta = -1.0;
    CHECK_THROWS_AS(bad.validate_and_project(), std::invalid_argument);
    bad = cfg;
    bad.theta0 = Eigen::Vector3d::Zero();  // wrong dimension
    CHECK_THROWS_AS(bad.validate_and_project(), std::invalid_argument);
}

TEST_CASE("lyapunov is the squared parameter error") {
    CHECK(lyapunov(Eigen::Vector2d(1.0, 2.0), Eigen::Vector2d(4.0, 6.0)) ==
          doctest::Approx(25.0));
}
