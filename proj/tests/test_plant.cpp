// SPDX-License-Identifier: MIT
//
// Unit tests for the plant/predictor representations: the predictor-form
// map against hand-worked cases, box geometry (norm, projection, interval
// enclosure), the minimum-phase check, coefficient schedules, and the two
// step primitives.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include <dstep/experiments.hpp>
#include <dstep/plant.hpp>

using namespace dstep;

TEST_CASE("to_predictor: delay-1 plants map directly") {
    // With d = 1 the quotient is trivially 1, alpha_i = -a_{i+1}, beta = b.
    PlantParameters p;
    p.d = 1;
    p.a = {0.5, -0.3};
    p.b = {1.0, 0.5};
    const PredictorForm form = to_predictor(p);
    REQUIRE(form.theta.alpha.size() == 2);
    CHECK(form.theta.alpha[0] == doctest::Approx(-0.5));
    CHECK(form.theta.alpha[1] == doctest::Approx(0.3));
    REQUIRE(form.theta.beta.size() == 2);
    CHECK(form.theta.beta[0] == doctest::Approx(1.0));
    CHECK(form.theta.beta[1] == doctest::Approx(0.5));
    CHECK(form.F.coeffs == std::vector<double>{1.0});
}

TEST_CASE("to_predictor: delay-2 worked example") {
    // A = 1 + 0.4 z^{-1} - 0.2 z^{-2}, B = 1.2 + 0.6 z^{-1}, d = 2.
    // Long division gives F = 1 - 0.4 z^{-1}, G = 0.36 - 0.08 z^{-1}, and
    // beta = F*B = 1.2 + 0.12 z^{-1} - 0.24 z^{-2}.
    PlantParameters p;
    p.d = 2;
    p.a = {0.4, -0.2};
    p.b = {1.2, 0.6};
    const PredictorForm form = to_predictor(p);
    const Eigen::VectorXd theta = form.theta.stacked();
    REQUIRE(theta.size() == 5);
    CHECK(theta(0) == doctest::Approx(0.36).epsilon(1e-14));
    CHECK(theta(1) == doctest::Approx(-0.08).epsilon(1e-14));
    CHECK(theta(2) == doctest::Approx(1.2).epsilon(1e-14));
    CHECK(theta(3) == doctest::Approx(0.12).epsilon(1e-14));
    CHECK(theta(4) == doctest::Approx(-0.24).epsilon(1e-14));
    REQUIRE(form.F.coeffs.size() == 2);
    CHECK(form.F.coeffs[1] == doctest::Approx(-0.4).epsilon(1e-14));
}

TEST_CASE("to_predictor: beta_0 equals b_0 and sizes follow the orders") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> coef(-1.5, 1.5);
    std::uniform_int_distribution<int> order_n(0, 4), order_m(0, 3),
        delay(1, 3);
    for (int trial = 0; trial < 100; ++trial) {
        PlantParameters p;
        p.d = delay(rng);
        p.a.resize(static_cast<std::size_t>(order_n(rng)));
        for (double& c : p.a) c = coef(rng);
        p.b.resize(static_cast<std::size_t>(order_m(rng)) + 1);
        for (double& c : p.b) c = coef(rng);
        if (std::abs(p.b[0]) < 0.2) p.b[0] = 1.0;
        const PredictorForm form = to_predictor(p);
        CHECK(static_cast<int>(form.theta.alpha.size()) == p.n());
        CHECK(static_cast<int>(form.theta.beta.size()) == p.m() + p.d);
        CHECK(form.theta.beta[0] == p.b[0]);
        CHECK(static_cast<int>(form.theta.stacked().size()) == p.dim());
    }
}

TEST_CASE("box_norm matches brute-force corner enumeration") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> edge(0.1, 2.0);
    std::uniform_real_distribution<double> center(-1.5, 1.5);
    std::uniform_int_distribution<int> dims(1, 10);
    for (int trial = 0; trial < 50; ++trial) {
        const int dim = dims(rng);
        ParameterBox S;
        S.lower.resize(dim);
        S.upper.resize(dim);
        S.gain_index = 0;
        for (int i = 0; i < dim; ++i) {
            const double c = center(rng), h = edge(rng);
            S.lower(i) = c - h;
            S.upper(i) = c + h;
        }
        // Keep the gain coordinate sign-definite so the box is admissible.
        S.lower(0) = 0.5;
        S.upper(0) = 0.5 + edge(rng);

        double brute = 0.0;
        for (std::uint32_t mask = 0; mask < (1u << dim); ++mask) {
            double sq = 0.0;
            for (int i = 0; i < dim; ++i) {
                const double v =
                    ((mask >> i) & 1u) ? S.upper(i) : S.lower(i);
                sq += v * v;
            }
            brute = std::max(brute, std::sqrt(sq));
        }
        CHECK(box_norm(S) == doctest::Approx(brute).epsilon(1e-12));
    }

    // The bundled demo box: [-2,2]^2 x [1.5,5] x [-1,1] has norm sqrt(34).
    CHECK(box_norm(demo_predictor_box()) ==
          doctest::Approx(std::sqrt(34.0)).epsilon(1e-14));
}

TEST_CASE("project_onto_box: identity inside, idempotent, non-expansive") {
    ParameterBox S;
    S.lower = Eigen::Vector4d(-2.0, -2.0, 1.5, -1.0);
    S.upper = Eigen::Vector4d(2.0, 2.0, 5.0, 1.0);
    S.gain_index = 2;
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> coord(-8.0, 8.0);
    for (int trial = 0; trial < 200; ++trial) {
        Eigen::VectorXd x(4), y(4);
        for (int i = 0; i < 4; ++i) {
            x(i) = coord(rng);
            y(i) = coord(rng);
        }
        const Eigen::VectorXd px = project_onto_box(x, S);
        const Eigen::VectorXd py = project_onto_box(y, S);
        for (int i = 0; i < 4; ++i) {
            CHECK(px(i) >= S.lower(i));
            CHECK(px(i) <= S.upper(i));
        }
        CHECK((project_onto_box(px, S) - px).norm() == 0.0);
        CHECK((px - py).norm() <= (x - y).norm() + 1e-15);
    }
    const Eigen::VectorXd inside = Eigen::Vector4d(0.0, 1.0, 3.0, -0.5);
    CHECK((project_onto_box(inside, S) - inside).norm() == 0.0);
}

TEST_CASE("ParameterBox validation and gain helpers") {
    ParameterBox S;
    S.lower = Eigen::Vector3d(-1.0, 1.5, -1.0);
    S.upper = Eigen::Vector3d(1.0, 5.0, 1.0);
    S.gain_index = 1;
    S.validate();
    CHECK(S.gain_sign() == 1);
    CHECK(S.gain_floor() == doctest::Approx(1.5));

    ParameterBox neg = S;
    neg.lower(1) = -5.0;
    neg.upper(1) = -1.5;
    neg.validate();
    CHECK(neg.gain_sign() == -1);
    CHECK(neg.gain_floor() == doctest::Approx(1.5));

    ParameterBox straddle = S;
    straddle.lower(1) = -1.0;  // interval now contains zero
    CHECK_THROWS_AS(straddle.validate(), std::invalid_argument);

    ParameterBox inverted = S;
    inverted.lower(0) = 2.0;  // lower > upper
    CHECK_THROWS_AS(inverted.validate(), std::invalid_argument);
}

TEST_CASE("predictor_box_from_coefficients is exact for the demo family") {
    const ParameterBox box =
        predictor_box_from_coefficients(demo_coefficient_box());
    const ParameterBox expect = demo_predictor_box();
    REQUIRE(box.dim() == expect.dim());
    for (Eigen::Index i = 0; i < box.dim(); ++i) {
        CHECK(box.lower(i) == doctest::Approx(expect.lower(i)));
        CHECK(box.upper(i) == doctest::Approx(expect.upper(i)));
    }
    CHECK(box.gain_index == expect.gain_index);
}

TEST_CASE("predictor_box_from_coefficients encloses sampled plants") {
    // For d > 1 the image is not box shaped; the interval recursion must
    // still produce an enclosing box.
    PlantCoefficientBox family;
    family.d = 2;
    family.a_lower = {-0.8, -0.5};
    family.a_upper = {0.8, 0.5};
    family.b_lower = {1.0, -0.6};
    family.b_upper = {2.0, 0.6};
    const ParameterBox box = predictor_box_from_coefficients(family);
    std::mt19937_64 rng(47);
    for (int trial = 0; trial < 300; ++trial) {
        const PlantParameters p = sample_plant_from_family(rng, family);
        const Eigen::VectorXd theta = to_predictor(p).theta.stacked();
        REQUIRE(theta.size() == box.dim());
        for (Eigen::Index i = 0; i < box.dim(); ++i) {
            CHECK(theta(i) >= box.lower(i) - 1e-12);
            CHECK(theta(i) <= box.upper(i) + 1e-12);
        }
    }
}

TEST_CASE("check_assumption1 flags unstable input zeros") {
    PlantParameters good;
    good.d = 1;
    good.a = {0.2};
    good.b = {1.5, -1.0};  // zero at 2/3
    PlantParameters bad = good;
    bad.b = {1.0, -1.2};  // zero at 1.2, outside the unit disk

    const MinimumPhaseReport ok = check_assumption1({good});
    CHECK(ok.ok);
    CHECK(ok.violations == 0);
    CHECK(ok.lambda_under == doctest::Approx(2.0 / 3.0));

    const MinimumPhaseReport mixed = check_assumption1({good, bad});
    CHECK_FALSE(mixed.ok);
    CHECK(mixed.violations == 1);

    // The demo family's corners achieve the decay-rate floor 1/1.5.
    std::vector<PlantParameters> corners;
    const PlantCoefficientBox fam = demo_coefficient_box();
    for (int mask = 0; mask < 16; ++mask) {
        PlantParameters p;
        p.d = 1;
        p.a = {(mask & 1) ? fam.a_upper[0] : fam.a_lower[0],
               (mask & 2) ? fam.a_upper[1] : fam.a_lower[1]};
        p.b = {(mask & 4) ? fam.b_upper[0] : fam.b_lower[0],
               (mask & 8) ? fam.b_upper[1] : fam.b_lower[1]};
        corners.push_back(p);
    }
    const MinimumPhaseReport fam_report = check_assumption1(corners);
    CHECK(fam_report.ok);
    CHECK(fam_report.lambda_under ==
          doctest::Approx(1.0 / 1.5).epsilon(1e-12));
}

TEST_CASE("plant_step and predictor_step hand cases") {
    SUBCASE("static gain") {
        PlantParameters p;
        p.d = 1;
        p.b = {2.0};
        const double y_hist[] = {0.0};
        const double u_hist[] = {3.0};
        CHECK(plant_step(p, {y_hist, 0}, {u_hist, 1}, 1.0) ==
              doctest::Approx(7.0));
    }
    SUBCASE("second-order recursion") {
        PlantParameters p;
        p.d = 1;
        p.a = {0.5, -0.3};
        p.b = {1.0, 0.5};
        // y(t) = -0.5*y(t-1) + 0.3*y(t-2) + u(t-1) + 0.5*u(t-2) + w
        const double y_hist[] = {1.0, -2.0};
        const double u_hist[] = {0.5, 1.0};
        CHECK(plant_step(p, {y_hist, 2}, {u_hist, 2}, 0.25) ==
              doctest::Approx(-0.5 - 0.6 + 0.5 + 0.5 + 0.25));
    }
    SUBCASE("insufficient history is rejected") {
        PlantParameters p;
        p.d = 1;
        p.a = {0.5};
        p.b = {1.0};
        const double y_hist[] = {1.0};
        CHECK_THROWS_AS(
            plant_step(p, {y_hist, 0}, {y_hist, 1}, 0.0),
            std::invalid_argument);
    }
    SUBCASE("predictor_step is the inner product plus noise") {
        PredictorParameters theta;
        theta.alpha = {0.5};
        theta.beta = {2.0, -1.0};
        Eigen::Vector3d phi(1.0, 0.25, 0.5);
        CHECK(predictor_step(theta, phi, 0.125) ==
              doctest::Approx(0.5 + 0.5 - 0.5 + 0.125));
    }
}

TEST_CASE("wbar filters the disturbance window with the quotient") {
    SUBCASE("delay 1 passes the disturbance through") {
        const Polynomial F({1.0});
        const double w[] = {0.7};
        CHECK(wbar(F, {w, 1}) == doctest::Approx(0.7));
    }
    SUBCASE("delay 2 worked example") {
        // F = 1 - 0.5 z^{-1}; constant w = 1 gives 1 - 0.5 = 0.5.
        const Polynomial F({1.0, -0.5});
        const double w[] = {1.0, 1.0};  // w(t+1), w(t+2) ascending
        CHECK(wbar(F, {w, 2}) == doctest::Approx(0.5));
        // Ascending order: f_0 multiplies the latest sample w(t+d).
        const double ramp[] = {1.0, 2.0};
        CHECK(wbar(F, {ramp, 2}) == doctest::Approx(2.0 - 0.5));
    }
}

TEST_CASE("InitialCondition shape checks and norm") {
    InitialCondition x0 = InitialCondition::zero(2, 1, 1);
    CHECK(x0.y_hist.size() == 2);  // n + d - 1
    CHECK(x0.u_hist.size() == 2);  // m + 2d - 1
    CHECK(x0.norm() == 0.0);
    x0.validate(2, 1, 1);
    CHECK_THROWS_AS(x0.validate(3, 1, 1), std::invalid_argument);

    InitialCondition filled;
    filled.y_hist = {3.0, 4.0};
    filled.u_hist = {0.0, 0.0};
    CHECK(filled.norm() == doctest::Approx(5.0));
}

TEST_CASE("CoefficientSpec and sinusoidal schedules evaluate per time") {
    CoefficientSpec spec;
    spec.offset = 3.25;
    spec.amplitude = -1.75;
    spec.frequency = 0.008;
    spec.time_shift = -1.0;
    CHECK(spec.value(1) == doctest::Approx(3.25 - 1.75));  // cos(0) at t=1
    CHECK(spec.value(11) == doctest::Approx(3.25 - 1.75 * std::cos(0.08)));

    const PlantSchedule demo = demo_timevarying_schedule();
    CHECK(demo.n() == 2);
    CHECK(demo.m() == 1);
    CHECK_FALSE(demo.time_invariant());
    const PlantParameters at1 = demo.at(1);
    CHECK(at1.a[0] == doctest::Approx(2.0));         // 2 cos(0)
    CHECK(at1.a[1] == doctest::Approx(0.0));         // -2 sin(0)
    CHECK(at1.b[0] == doctest::Approx(1.5));         // 3.25 - 1.75 cos(0)
    CHECK(at1.b[1] == doctest::Approx(-1.0));        // -cos(0)
    const PlantParameters at101 = demo.at(101);
    CHECK(at101.a[0] == doctest::Approx(2.0 * std::cos(1.0)));
    CHECK(at101.b[0] == doctest::Approx(3.25 - 1.75 * std::cos(0.8)));
}

TEST_CASE("tabulated schedules clamp outside the table") {
    PlantSchedule sched;
    sched.kind = PlantSchedule::Kind::kTabulated;
    sched.d = 1;
    sched.table_start = 10;
    sched.a_rows = {{0.1}, {0.2}, {0.3}};
    sched.b_rows = {{1.0}, {1.1}, {1.2}};
    sched.validate();
    CHECK(sched.at(9).a[0] == doctest::Approx(0.1));   // clamped low
    CHECK(sched.at(10).a[0] == doctest::Approx(0.1));
    CHECK(sched.at(12).b[0] == doctest::Approx(1.2));
    CHECK(sched.at(99).b[0] == doctest::Approx(1.2));  // clamped high

    PlantSchedule ragged = sched;
    ragged.b_rows.pop_back();
    CHECK_THROWS_AS(ragged.validate(), std::invalid_argument);
}

TEST_CASE("PlantParameters validation") {
    PlantParameters p;
    p.d = 1;
    p.b = {1.0};
    p.validate();
    p.d = 0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.d = 1;
    p.b = {0.0};
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.b.clear();
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
