// SPDX-License-Identifier: MIT

#include "dstep/estimator.hpp"

#include <cmath>
#include <stdexcept>

namespace dstep {

void EstimatorConfig::validate_and_project() {
    S.validate();
    if (!(delta > 0.0)) {
        throw std::invalid_argument(
            "EstimatorConfig: delta must be positive (or infinite)");
    }
    if (min_phi_norm < 0.0) {
        throw std::invalid_argument(
            "EstimatorConfig: min_phi_norm must be nonnegative");
    }
    if (theta0.size() != S.lower.size()) {
        throw std::invalid_argument(
            "EstimatorConfig: theta0 dimension does not match the box");
    }
    theta0 = project_onto_box(theta0, S);
}

double prediction_error(const Eigen::VectorXd& phi,
                        const Eigen::VectorXd& theta_hat, double y_next) {
    if (phi.size() != theta_hat.size()) {
        throw std::invalid_argument("prediction_error: dimension mismatch");
    }
    return y_next - phi.dot(theta_hat);
}

double deadzone_gate(const Eigen::VectorXd& phi, double e,
                     const EstimatorConfig& cfg) {
    const double phi_norm = phi.norm();
    if (std::isinf(cfg.delta)) {
        return phi_norm > 0.0 ? 1.0 : 0.0;
    }
    const double threshold = (2.0 * box_norm(cfg.S) + cfg.delta) * phi_norm;
    return std::abs(e) < threshold ? 1.0 : 0.0;
}

EstimatorStep estimator_update(const Eigen::VectorXd& theta_prev,
                               const Eigen::VectorXd& phi, double y_next,
                               const EstimatorConfig& cfg) {
    EstimatorStep step;
    step.e = prediction_error(phi, theta_prev, y_next);

    const double phi_norm = phi.norm();
    double gate = deadzone_gate(phi, step.e, cfg);
    if (phi_norm <= cfg.min_phi_norm) {
        gate = 0.0;
    }

    step.rho = gate;
    if (gate != 0.0) {
        step.nu = std::abs(step.e) / phi_norm;
        step.theta_check =
            theta_prev + (phi / (phi_norm * phi_norm)) * step.e;
    } else {
        step.nu = 0.0;
        step.theta_check = theta_prev;
    }
    step.theta_hat = project_onto_box(step.theta_check, cfg.S);
    return step;
}

double lyapunov(const Eigen::VectorXd& theta_hat,
                const Eigen::VectorXd& theta_star) {
    if (theta_hat.size() != theta_star.size()) {
        throw std::invalid_argument("lyapunov: dimension mismatch");
    }
    return (theta_hat - theta_star).squaredNorm();
}

}  // namespace dstep
