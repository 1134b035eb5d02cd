// SPDX-License-Identifier: MIT
//
// Post-run analysis: the closed-loop regressor-update models (nominal
// error-driven form, estimate-driven form, and the gated decomposition that
// splits the update into a nominal part, estimator-scaled perturbations, and
// an exogenous remainder), the extended stacked-state system, transition
// decay fitting, convolution-bound fitting, l2 tracking diagnostics, drift
// budgets, and the estimator-inequality checkers used by `verify`.

#ifndef DSTEP_ANALYSIS_HPP
#define DSTEP_ANALYSIS_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "dstep/controller.hpp"
#include "dstep/estimator.hpp"
#include "dstep/plant.hpp"
#include "dstep/trace.hpp"

namespace dstep {

// ---------------------------------------------------------------------------
// Closed-loop models of the regressor update
// ---------------------------------------------------------------------------

/**
 * Nominal regressor-update model driven by the tracking error:
 *
 *   phi(t+1) = A phi(t)
 *            + B_err*(err(t+1) + ystar(t+1))
 *            + B_gain*sum_{j=0}^{d} gain_coeffs[j]*(err(t+1+j) + ystar(t+1+j))
 *            - (1/b0)*B_gain*w(t+d+1)
 *
 * with err(s) := y(s) - ystar(s).  B_err is the first unit vector (zero when
 * n = 0), B_gain the (n+1)-th, and gain_coeffs[j] = a_{d-j}/b0 with a_0 = 1
 * and a_i = 0 for i > n.  The eigenvalues of A are the zeros (in z) of the
 * input polynomial plus n + d zeros at the origin.
 */
struct ErrorDrivenModel {
    Eigen::MatrixXd A;
    Eigen::VectorXd B_err;
    Eigen::VectorXd B_gain;
    std::vector<double> gain_coeffs;  // d + 1 values, index j = 0..d
    double b0 = 0.0;
    int n = 0, m = 0, d = 1;
};

ErrorDrivenModel build_error_driven_model(const PlantParameters& p);

/**
 * Regressor-update model driven by the current estimate (valid per step):
 *
 *   phi(t+1) = A phi(t) + B_ref*ystar(t+d+1) + B_dist*w(t+1)
 *
 * assembled from the true plant coefficients in effect at arrival time t+1
 * and the estimate theta_next = theta_hat(t+1) used by the control law.
 */
struct EstimateDrivenModel {
    Eigen::MatrixXd A;
    Eigen::VectorXd B_ref;
    Eigen::VectorXd B_dist;
};

EstimateDrivenModel build_estimate_driven_model(
    const PlantParameters& p, const Eigen::VectorXd& theta_next,
    const ParameterBox& S);

/** Worst relative residual of a per-step identity over a trace window. */
struct ModelIdentityReport {
    double worst_residual = 0.0;  // max over t of ||lhs-rhs|| / scale(t)
    std::int64_t worst_t = 0;
    std::int64_t steps_checked = 0;
};

/** Checks the error-driven identity on a time-invariant plant's trace. */
ModelIdentityReport check_error_driven_identity(
    const SimulationTrace& trace, const RegressorHistory& history,
    const PlantParameters& p);

/** Checks the estimate-driven identity (any schedule). */
ModelIdentityReport check_estimate_driven_identity(
    const SimulationTrace& trace, const RegressorHistory& history,
    const PlantSchedule& schedule, const ParameterBox& S);

/**
 * Monic characteristic-polynomial coefficients [1, c_1, ..., c_dim] of a
 * square matrix, p(z) = z^dim + c_1 z^{dim-1} + ... + c_dim, via the trace
 * recursion.  Spectrum claims about matrices with defective eigenvalue
 * clusters are checked through this identity: coefficient equality is exact
 * where a direct eigensolve scatters a multiplicity-k cluster by
 * O(eps^{1/k}).
 */
std::vector<double> characteristic_polynomial(const Eigen::MatrixXd& A);

/** Running maxima of the estimate-driven model norms (Frobenius). */
struct EstimateDrivenNorms {
    double max_A = 0.0;
    double max_B_ref = 0.0;
    double max_B_dist = 0.0;
};

EstimateDrivenNorms estimate_driven_norms(const SimulationTrace& trace,
                                          const PlantSchedule& schedule,
                                          const ParameterBox& S);

// ---------------------------------------------------------------------------
// Gated decomposition of the regressor update
// ---------------------------------------------------------------------------

/**
 * Exact rewrite of the regressor update at step t (time-invariant plant):
 *
 *   phi(t+1) = A phi(t) + sum_{j=0}^{d-1} Delta[j] phi(t-j) + eta
 *
 * where each Delta[j] collects rank-one terms scaled by the gated,
 * phi-normalized tracking error, and eta collects reference/disturbance
 * terms plus the gated-off error remainders eta0.
 *
 * Diagnostics recorded per contributing row s = t+1 .. t+d+1:
 *  - nubar[s-(t+1)]: the gated normalized tracking error at row s
 *  - eta0[s-(t+1)]:  the gated-off tracking error at row s
 */
struct RegressorDecomposition {
    std::int64_t t = 0;
    std::vector<Eigen::MatrixXd> Delta;  // size d
    Eigen::VectorXd eta;
    std::vector<double> nubar;  // size d + 1
    std::vector<double> eta0;   // size d + 1
    double residual = 0.0;      // ||phi(t+1) - reconstruction||
    double scale = 1.0;         // residual normalizer
};

/**
 * Valid for t0 + d - 1 <= t <= last trace row - (d + 1); the model needs
 * rows up to t + d + 1 for lookahead.
 */
RegressorDecomposition decompose_regressor_update(
    const SimulationTrace& trace, const RegressorHistory& history,
    const PlantParameters& p, const ParameterBox& S, std::int64_t t);

/** Aggregate decomposition checks over the whole valid window of a trace. */
struct DecompositionReport {
    double worst_residual = 0.0;         // relative reconstruction residual
    double worst_rank1_slack = 0.0;      // | ||rank-one|| - |nubar| |
    double worst_nubar_slack = 0.0;      // max over rows of
                                         // |nubar| - sum of update magnitudes
    double worst_eta0_slack = 0.0;       // finite delta only; see below
    double worst_extended_residual = 0.0;
    std::int64_t steps_checked = 0;
};

/**
 * Runs decompose_regressor_update over the valid window and additionally
 * checks, per row: the rank-one factor norms equal |nubar|; |nubar(s)| is at
 * most the sum of the last d recorded update magnitudes; |eta0(s)| is at
 * most ((4*box_norm+delta)/delta)*|wbar(s)| when delta is finite; and the
 * stacked extended-state identity reproduces the trace.
 */
DecompositionReport check_decomposition(const SimulationTrace& trace,
                                        const RegressorHistory& history,
                                        const PlantParameters& p,
                                        const ParameterBox& S, double delta);

// ---------------------------------------------------------------------------
// Extended stacked-state system
// ---------------------------------------------------------------------------

/** Block companion lift of the nominal model to the stacked state. */
Eigen::MatrixXd extended_nominal(const ErrorDrivenModel& model);

/** Block perturbation whose first block row is [Delta_0 .. Delta_{d-1}]. */
Eigen::MatrixXd extended_delta(const RegressorDecomposition& dec, int dim);

/** The stacked state [phi(t); phi(t-1); ...; phi(t-d+1)]. */
Eigen::VectorXd extended_phi(const RegressorHistory& history, std::int64_t t);

// ---------------------------------------------------------------------------
// Transition-matrix decay and convolution-bound fitting
// ---------------------------------------------------------------------------

/** Tightest (gamma, mu) with ||Phi(tau+L, tau)|| <= gamma * mu^L. */
struct DecayFit {
    double gamma = 0.0;
    double mu = 0.0;
    int max_lag = 0;
};

/**
 * Forms all ordered products of (A_nominal + deltas[i]) over the window and
 * fits the smallest decay rate mu whose envelope constant stays below
 * gamma_cap, then the matching gamma.  Norms are Frobenius.
 */
DecayFit transition_decay(const Eigen::MatrixXd& A_nominal,
                          const std::vector<Eigen::MatrixXd>& deltas,
                          double gamma_cap = 1e8);

/** Per-run data consumed by the convolution-bound fit. */
struct DecayRun {
    double x0_norm = 0.0;
    std::int64_t t0 = 0;
    std::vector<double> phi_norms;  // ||phi(k)|| for k = t0 .. t0 + len - 1
    std::vector<double> exogenous;  // |ystar(k+d)| + |w(k)| per k
};

/**
 * Builds the fit input from a finished trace.  The reference signal is
 * needed because the envelope weights the preview ystar(k+d), which runs
 * past the last recorded row.
 */
DecayRun make_decay_run(const SimulationTrace& trace,
                        const RegressorHistory& history,
                        const SignalSpec& reference);

/** Result of fitting ||phi(k)|| <= c*lambda^{k-t0}*||x0|| + conv term. */
struct BoundFit {
    bool feasible = false;
    double c = 0.0;
    double lambda = 1.0;
    double lambda_floor = 0.0;
};

/**
 * Fits the decay rate from the runs' worst sustained post-peak rate (max
 * over all windows of >= 10 steps, pushed a quarter of the way toward 1 as
 * headroom, never below lambda_floor), then sets c to the largest pointwise
 * ratio against the resulting envelope.  Infeasible when that constant
 * exceeds c_cap.  The envelope weights the reference at its loop-entry time
 * (the preview ystar(k+d) enters the input at step k), so pure-reference
 * runs are covered as well.
 */
BoundFit fit_convolution_bound(const std::vector<DecayRun>& runs,
                               double lambda_floor, double c_cap = 1e8);

/** Pointwise violations of the fitted bound (with a safety margin on c). */
int count_bound_violations(const BoundFit& fit,
                           const std::vector<DecayRun>& runs, double margin);

// ---------------------------------------------------------------------------
// Tracking, drift, and estimator-inequality diagnostics
// ---------------------------------------------------------------------------

/** Cumulative squared tracking error from t0 + 2d - 1 on. */
struct L2Report {
    double cumulative = 0.0;
    double tail_increment = 0.0;  // contribution of the final tail_window rows
    double ratio = 0.0;           // cumulative / (||x0||^2 + ystar_sup^2)
};

L2Report l2_tracking_check(const SimulationTrace& trace, double ystar_sup,
                           std::int64_t tail_window = 100);

/** Total variation of the predictor-form truth over [t1, t2). */
struct DriftReport {
    double total_variation = 0.0;
    double per_step_max = 0.0;
    bool fits = false;
};

DriftReport drift_budget(const PlantSchedule& schedule, std::int64_t t1,
                         std::int64_t t2, double c0, double eps_rate);

/**
 * Estimator inequality checks along a trace:
 *  (i)  per-step parameter motion is at most the recorded update magnitude;
 *  (ii) the telescoped squared-error inequality (needs the true parameter,
 *       so callers pass theta_star only for time-invariant runs); its
 *       disturbance term is the realized discrepancy y(t) - phi(t-d).theta*,
 *       which matches the filtered-disturbance column on plant-generated
 *       rows and keeps the inequality valid for arbitrary initial histories;
 *  plus gate/box invariants and the summed squared update magnitudes.
 */
struct EstimatorBoundReport {
    bool step_ok = true;
    bool v_ok = true;
    bool gate_ok = true;
    bool box_ok = true;
    double worst_step_slack = 0.0;  // min over t of bound - motion
    double worst_v_slack = 0.0;     // min over t of rhs - V(t)
    double nu_sq_sum = 0.0;
    std::int64_t worst_step_t = 0;
    std::int64_t worst_v_t = 0;
};

EstimatorBoundReport check_estimator_bounds(const SimulationTrace& trace,
                                            const RegressorHistory& history,
                                            const EstimatorConfig& cfg,
                                            const Eigen::VectorXd* theta_star,
                                            double step_tol = 1e-10,
                                            double v_tol = 1e-9);

/** Residuals of the prediction/tracking error identities (time-invariant). */
struct ErrorIdentityReport {
    double worst_e_residual = 0.0;
    double worst_eps_residual = 0.0;
    std::int64_t steps_checked = 0;
};

/**
 * e-identity rows start at e_start (t0 for runs with consistent initial
 * histories, t0 + d - 1 otherwise); the tracking identity always starts at
 * t0 + d, where the reference equals the d-step-old predicted output.
 * theta0 supplies the estimate in effect before the first row.
 */
ErrorIdentityReport check_error_identities(const SimulationTrace& trace,
                                           const RegressorHistory& history,
                                           const Eigen::VectorXd& theta_star,
                                           const Eigen::VectorXd& theta0,
                                           std::int64_t e_start);

/** Largest regressor norm over rows t0 .. last (boundedness witness). */
double max_phi_norm(const SimulationTrace& trace,
                    const RegressorHistory& history);

}  // namespace dstep

#endif  // DSTEP_ANALYSIS_HPP
