// SPDX-License-Identifier: MIT
//
// Gated-projection parameter estimator: a gradient-type update along
// phi/||phi||^2, switched off by a relative-error deadzone, followed by
// projection onto the admissible parameter box.  Also provides the
// Lyapunov-style diagnostic used by the verification suite.

#ifndef DSTEP_ESTIMATOR_HPP
#define DSTEP_ESTIMATOR_HPP

#include <Eigen/Dense>

#include "dstep/plant.hpp"

namespace dstep {

/**
 * Configuration of the estimator.
 *
 * `delta` controls the deadzone width: the update is enabled only when
 * |e| < (2*box_norm(S) + delta)*||phi||.  The distinguished value
 * `delta = infinity` (the default) disables the deadzone entirely except
 * for the degenerate case ||phi|| = 0, where the update is always off.
 *
 * `min_phi_norm` is a purely numerical floor (default 0 = off): when
 * ||phi|| <= min_phi_norm the update is suppressed and the recorded gate
 * and update magnitude are both zero.  The ideal algorithm -- the one the
 * stability guarantees are about -- runs with the floor disabled.
 */
struct EstimatorConfig {
    double delta = std::numeric_limits<double>::infinity();
    ParameterBox S;
    Eigen::VectorXd theta0;
    double min_phi_norm = 0.0;

    /** Validates fields and clamps theta0 into S. */
    void validate_and_project();
};

/** Result of one estimator update. */
struct EstimatorStep {
    double e = 0.0;    ///< prediction error driving the update
    double rho = 0.0;  ///< effective gate value in {0, 1}
    double nu = 0.0;   ///< normalized update magnitude rho*|e|/||phi||
    Eigen::VectorXd theta_check;  ///< pre-projection parameter vector
    Eigen::VectorXd theta_hat;    ///< post-projection parameter vector
    double V = std::numeric_limits<double>::quiet_NaN();  ///< filled by
                                                          ///< callers that
                                                          ///< know the truth
};

/** e = y_next - phi . theta_hat. */
double prediction_error(const Eigen::VectorXd& phi,
                        const Eigen::VectorXd& theta_hat, double y_next);

/**
 * Deadzone gate: 1 when the error is small relative to the regressor.
 *
 * Finite delta: 1 iff |e| < (2*box_norm(S) + delta)*||phi|| (strict).
 * delta = infinity: 1 iff ||phi|| > 0 (with the convention inf*0 = 0 the
 * strict inequality fails only at phi = 0).
 */
double deadzone_gate(const Eigen::VectorXd& phi, double e,
                     const EstimatorConfig& cfg);

/**
 * One full update: gate, normalized gradient step, projection.
 *
 * theta_check = theta_prev + rho*(phi/||phi||^2)*e whenever the gate is on
 * and ||phi|| exceeds the numerical floor; theta_hat is its projection
 * onto cfg.S.  `rho` and `nu` record the effective gate and update size
 * (both zero when the update was suppressed for any reason).
 */
EstimatorStep estimator_update(const Eigen::VectorXd& theta_prev,
                               const Eigen::VectorXd& phi, double y_next,
                               const EstimatorConfig& cfg);

/** Squared parameter-error diagnostic ||theta_hat - theta_star||^2. */
double lyapunov(const Eigen::VectorXd& theta_hat,
                const Eigen::VectorXd& theta_star);

}  // namespace dstep

#endif  // DSTEP_ESTIMATOR_HPP
