// SPDX-License-Identifier: MIT
//
// Certainty-equivalence d-step-ahead control law, regressor bookkeeping,
// and the closed-loop simulation engine that produces SimulationTraces.

#ifndef DSTEP_CONTROLLER_HPP
#define DSTEP_CONTROLLER_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "dstep/estimator.hpp"
#include "dstep/plant.hpp"
#include "dstep/signals.hpp"
#include "dstep/trace.hpp"

namespace dstep {

/**
 * Full input/output series of one run, deep enough to form the regressor
 * phi(s) = [y(s)..y(s-n+1), u(s)..u(s-m-d+1)] for every s >= t0 - d.
 *
 * The prefix below t0 comes from the initial condition (y back to
 * t0-(n+d-1), u back to t0-(m+2d-1)); later values are appended by the
 * engine in time order.  The whole series is retained (rather than a
 * minimal ring) because the analysis passes need lagged regressors
 * phi(s-j) for j up to 2d after the fact.
 */
class RegressorHistory {
public:
    RegressorHistory(int n, int m, int d, std::int64_t t0,
                     const InitialCondition& x0);

    int n() const { return n_; }
    int m() const { return m_; }
    int d() const { return d_; }
    int dim() const { return n_ + m_ + d_; }
    std::int64_t t0() const { return t0_; }

    /** Latest recorded output / input time (t0 - 1 right after init). */
    std::int64_t last_y_time() const;
    std::int64_t last_u_time() const;

    double y(std::int64_t s) const;
    double u(std::int64_t s) const;

    /** Appends y(s) / u(s); s must be exactly one past the latest time. */
    void push_y(std::int64_t s, double value);
    void push_u(std::int64_t s, double value);

    /** The regressor phi(s); valid for t0 - d <= s <= recorded horizon. */
    Eigen::VectorXd phi(std::int64_t s) const;

private:
    int n_, m_, d_;
    std::int64_t t0_;
    std::int64_t y_base_, u_base_;  // time of the first stored sample
    std::vector<double> y_, u_;
};

/**
 * The control input u(t) solving theta_hat . phi(t) = ystar(t+d) for u(t):
 *
 *   u(t) = [ystar(t+d) - sum_i alpha_i y(t-i) - sum_{i>=1} beta_i u(t-i)]
 *          / beta_0
 *
 * The history must already contain y(t).  beta_0 is theta_hat(n); by the
 * box invariant it is bounded away from zero, and a magnitude below the
 * box floor is reported as a hard error (it indicates a bug, not data).
 */
double control_input(const Eigen::VectorXd& theta_hat,
                     const RegressorHistory& history, std::int64_t t,
                     double ystar_future, const ParameterBox& S);

/**
 * Runs the closed loop for `horizon` steps t = t0 .. t0 + horizon - 1.
 *
 * Per step: the plant (with the schedule's coefficients in effect at t)
 * produces y(t) under disturbance(t); the estimator updates off the
 * prediction error e(t) = y(t) - phi(t-d).theta_hat(t-1); the control law
 * then picks u(t) from the fresh estimate and the reference preview
 * ystar(t+d).  Everything is deterministic given the inputs.
 */
SimulationTrace closed_loop_run(const PlantSchedule& schedule,
                                const EstimatorConfig& estimator,
                                const SignalSpec& reference,
                                const SignalSpec& disturbance,
                                const InitialCondition& x0, std::int64_t t0,
                                std::int64_t horizon);

/** The eps column (tracking error ystar - y) of a trace. */
std::vector<double> tracking_error(const SimulationTrace& trace);

/** Root-mean-square of eps over rows with lo <= t <= hi. */
double rms_tracking_error(const SimulationTrace& trace, std::int64_t lo,
                          std::int64_t hi);

/** Rebuilds the full input/output history recorded by a trace. */
RegressorHistory replay_history(const SimulationTrace& trace);

}  // namespace dstep

#endif  // DSTEP_CONTROLLER_HPP
