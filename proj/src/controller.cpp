// SPDX-License-Identifier: MIT

#include "dstep/controller.hpp"

#include <cmath>
#include <stdexcept>

namespace dstep {

RegressorHistory::RegressorHistory(int n, int m, int d, std::int64_t t0,
                                   const InitialCondition& x0)
    : n_(n), m_(m), d_(d), t0_(t0) {
    if (n < 0 || m < 0 || d < 1) {
        throw std::invalid_argument("RegressorHistory: bad plant orders");
    }
    x0.validate(n, m, d);
    y_base_ = t0 - (n + d - 1);
    u_base_ = t0 - (m + 2 * d - 1);
    // x0 stores most-recent-first: y(t0-1) .. y(t0-n-d+1).
    y_.assign(x0.y_hist.rbegin(), x0.y_hist.rend());
    u_.assign(x0.u_hist.rbegin(), x0.u_hist.rend());
}

std::int64_t RegressorHistory::last_y_time() const {
    return y_base_ + static_cast<std::int64_t>(y_.size()) - 1;
}

std::int64_t RegressorHistory::last_u_time() const {
    return u_base_ + static_cast<std::int64_t>(u_.size()) - 1;
}

double RegressorHistory::y(std::int64_t s) const {
    if (s < y_base_ || s > last_y_time()) {
        throw std::out_of_range("RegressorHistory: y(t) outside recorded range");
    }
    return y_[static_cast<std::size_t>(s - y_base_)];
}

double RegressorHistory::u(std::int64_t s) const {
    if (s < u_base_ || s > last_u_time()) {
        throw std::out_of_range("RegressorHistory: u(t) outside recorded range");
    }
    return u_[static_cast<std::size_t>(s - u_base_)];
}

void RegressorHistory::push_y(std::int64_t s, double value) {
    if (s != last_y_time() + 1) {
        throw std::logic_error("RegressorHistory: y pushed out of order");
    }
    y_.push_back(value);
}

void RegressorHistory::push_u(std::int64_t s, double value) {
    if (s != last_u_time() + 1) {
        throw std::logic_error("RegressorHistory: u pushed out of order");
    }
    u_.push_back(value);
}

Eigen::VectorXd RegressorHistory::phi(std::int64_t s) const {
    Eigen::VectorXd v(dim());
    for (int i = 0; i < n_; ++i) {
        v(i) = y(s - i);
    }
    for (int i = 0; i < m_ + d_; ++i) {
        v(n_ + i) = u(s - i);
    }
    return v;
}

double control_input(const Eigen::VectorXd& theta_hat,
                     const RegressorHistory& history, std::int64_t t,
                     double ystar_future, const ParameterBox& S) {
    const int n = history.n();
    const int m = history.m();
    const int d = history.d();
    if (theta_hat.size() != history.dim()) {
        throw std::invalid_argument("control_input: estimate width mismatch");
    }
    const double beta0 = theta_hat(n);
    if (std::abs(beta0) < S.gain_floor() * (1.0 - 1e-12)) {
        throw std::runtime_error(
            "control_input: leading gain below the box floor (invariant "
            "breach)");
    }
    double acc = ystar_future;
    for (int i = 0; i < n; ++i) {
        acc -= theta_hat(i) * history.y(t - i);
    }
    for (int i = 1; i < m + d; ++i) {
        acc -= theta_hat(n + i) * history.u(t - i);
    }
    return acc / beta0;
}

SimulationTrace closed_loop_run(const PlantSchedule& schedule,
                                const EstimatorConfig& estimator,
                                const SignalSpec& reference,
                                const SignalSpec& disturbance,
                                const InitialCondition& x0, std::int64_t t0,
                                std::int64_t horizon) {
    schedule.validate();
    reference.validate();
    disturbance.validate();
    const int n = schedule.n();
    const int m = schedule.m();
    const int d = schedule.d;
    if (horizon < 1) {
        throw std::invalid_argument("closed_loop_run: horizon must be >= 1");
    }

    EstimatorConfig cfg = estimator;
    cfg.validate_and_project();
    if (cfg.S.dim() != n + m + d) {
        throw std::invalid_argument(
            "closed_loop_run: box dimension does not match the plant orders");
    }

    RegressorHistory history(n, m, d, t0, x0);

    // Per-step predictor truth (for the V and wbar diagnostics).  For a
    // time-invariant schedule both are computed once.
    const bool constant_plant = schedule.time_invariant();
    PredictorForm fixed_form;
    if (constant_plant) {
        fixed_form = to_predictor(schedule.at(t0));
    }

    SimulationTrace trace;
    trace.t0 = t0;
    trace.n = n;
    trace.m = m;
    trace.d = d;
    trace.x0 = x0;
    trace.rows.reserve(static_cast<std::size_t>(horizon));

    Eigen::VectorXd theta_prev = cfg.theta0;
    std::vector<double> y_hist(static_cast<std::size_t>(n));
    std::vector<double> u_hist(static_cast<std::size_t>(m + 1));

    for (std::int64_t t = t0; t < t0 + horizon; ++t) {
        const PlantParameters plant = schedule.at(t);
        plant.validate();
        const double w_t = disturbance(t);

        for (int i = 0; i < n; ++i) {
            y_hist[static_cast<std::size_t>(i)] = history.y(t - 1 - i);
        }
        for (int i = 0; i <= m; ++i) {
            u_hist[static_cast<std::size_t>(i)] = history.u(t - d - i);
        }
        const double y_t = plant_step(plant, y_hist, u_hist, w_t);
        history.push_y(t, y_t);

        const Eigen::VectorXd phi_lag = history.phi(t - d);
        const EstimatorStep step =
            estimator_update(theta_prev, phi_lag, y_t, cfg);
        theta_prev = step.theta_hat;

        const double ystar_future = reference(t + d);
        const double u_t =
            control_input(step.theta_hat, history, t, ystar_future, cfg.S);
        history.push_u(t, u_t);

        if (!std::isfinite(y_t) || !std::isfinite(u_t)) {
            throw std::runtime_error(
                "closed_loop_run: trajectory left the representable range");
        }

        const PredictorForm form =
            constant_plant ? fixed_form : to_predictor(plant);
        double wbar_t = 0.0;
        for (int i = 0; i < d; ++i) {
            wbar_t += form.F.coeffs[static_cast<std::size_t>(i)] *
                      disturbance(t - i);
        }
        const Eigen::VectorXd theta_star =
            constant_plant ? fixed_form.theta.stacked()
                           : to_predictor(schedule.at(t + d)).theta.stacked();

        TraceRecord row;
        row.t = t;
        row.y = y_t;
        row.u = u_t;
        row.ystar = reference(t);
        row.w = w_t;
        row.wbar = wbar_t;
        row.e = step.e;
        row.eps = row.ystar - y_t;
        row.rho = step.rho;
        row.nu = step.nu;
        row.V = lyapunov(step.theta_hat, theta_star);
        row.theta_hat = step.theta_hat;
        trace.rows.push_back(std::move(row));
    }
    return trace;
}

std::vector<double> tracking_error(const SimulationTrace& trace) {
    std::vector<double> eps;
    eps.reserve(trace.rows.size());
    for (const TraceRecord& r : trace.rows) {
        eps.push_back(r.eps);
    }
    return eps;
}

double rms_tracking_error(const SimulationTrace& trace, std::int64_t lo,
                          std::int64_t hi) {
    double acc = 0.0;
    std::int64_t count = 0;
    for (const TraceRecord& r : trace.rows) {
        if (r.t >= lo && r.t <= hi) {
            acc += r.eps * r.eps;
            ++count;
        }
    }
    if (count == 0) {
        throw std::invalid_argument("rms_tracking_error: empty window");
    }
    return std::sqrt(acc / static_cast<double>(count));
}

RegressorHistory replay_history(const SimulationTrace& trace) {
    trace.validate();
    RegressorHistory history(trace.n, trace.m, trace.d, trace.t0, trace.x0);
    for (const TraceRecord& r : trace.rows) {
        history.push_y(r.t, r.y);
        history.push_u(r.t, r.u);
    }
    return history;
}

}  // namespace dstep
