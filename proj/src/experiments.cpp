// SPDX-License-Identifier: MIT

#include "dstep/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "dstep/seeding.hpp"

namespace dstep {

namespace {

std::string detail_fmt(const char* fmt, ...) {
    char buf[256];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, args);
    va_end(args);
    return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Bundled demo
// ---------------------------------------------------------------------------

PlantCoefficientBox demo_coefficient_box() {
    PlantCoefficientBox box;
    box.d = 1;
    box.a_lower = {-2.0, -2.0};
    box.a_upper = {2.0, 2.0};
    box.b_lower = {1.5, -1.0};
    box.b_upper = {5.0, 1.0};
    return box;
}

ParameterBox demo_predictor_box() {
    return predictor_box_from_coefficients(demo_coefficient_box());
}

PlantParameters demo_midpoint_plant() {
    // Interval midpoints for a1, a2, b0; b1 at the value its demo schedule
    // starts from (the published example plant, input zero at 1/3.25).
    PlantParameters p;
    p.d = 1;
    p.a = {0.0, 0.0};
    p.b = {3.25, -1.0};
    return p;
}

PlantSchedule demo_timevarying_schedule() {
    // The published coefficient trajectories are indexed by the departure
    // time of the output they produce; this engine indexes coefficients by
    // arrival time, so each spec carries a one-step shift.
    PlantSchedule s;
    s.kind = PlantSchedule::Kind::kSinusoidal;
    s.d = 1;

    CoefficientSpec a1;
    a1.amplitude = 2.0;
    a1.frequency = 0.01;
    a1.time_shift = -1.0;

    CoefficientSpec a2;
    a2.amplitude = -2.0;
    a2.frequency = 0.007;
    a2.time_shift = -1.0;
    a2.waveform = CoefficientSpec::Waveform::kSin;

    CoefficientSpec b0;
    b0.offset = 3.25;
    b0.amplitude = -1.75;
    b0.frequency = 0.008;
    b0.time_shift = -1.0;

    CoefficientSpec b1;
    b1.amplitude = -1.0;
    b1.frequency = 0.02;
    b1.time_shift = -1.0;

    s.a_spec = {a1, a2};
    s.b_spec = {b0, b1};
    return s;
}

ExperimentConfig demo_experiment() {
    ExperimentConfig c;
    c.t0 = 1;
    c.horizon = 1000;
    c.seed = 0;
    c.plant = demo_timevarying_schedule();
    c.box = demo_predictor_box();
    c.delta = std::numeric_limits<double>::infinity();
    c.theta0 = (Eigen::VectorXd(4) << 0.0, 0.0, 3.25, 0.0).finished();
    c.min_phi_norm = 0.0;
    c.reference = SignalSpec::cosine(1.0, 1.0);
    // Active exactly when the published disturbance 0.1*cos(10*tau) is, for
    // departure times tau = t - 1 in (200, 500].
    c.disturbance = SignalSpec::windowed_cosine(0.1, 10.0, 200, 500, 0.0,
                                                -1.0);
    // Published initial data y(-1) = y(0) = -1, u(-1) = 0.  The input one
    // step before the first simulated output is the control law's own first
    // action, computable in closed form from the midpoint estimate:
    // u(0) = ystar(1) / beta0_hat = cos(1) / 3.25.
    c.x0.y_hist = {-1.0, -1.0};
    c.x0.u_hist = {std::cos(1.0) / 3.25, 0.0};
    return c;
}

DemoSummary summarize_demo(const SimulationTrace& trace,
                           const ParameterBox& S) {
    DemoSummary summary;
    summary.rms_early = rms_tracking_error(trace, 100, 200);
    summary.rms_mid = rms_tracking_error(trace, 201, 500);
    summary.rms_late = rms_tracking_error(trace, 600, 900);
    summary.estimates_in_box = true;
    for (const TraceRecord& r : trace.rows) {
        if ((r.theta_hat.array() < S.lower.array()).any() ||
            (r.theta_hat.array() > S.upper.array()).any()) {
            summary.estimates_in_box = false;
            break;
        }
    }
    return summary;
}

// ---------------------------------------------------------------------------
// Random sampling
// ---------------------------------------------------------------------------

namespace {

/** Monic coefficient vector with all roots inside |z| <= max_modulus,
 *  sampled as real roots or conjugate pairs. */
std::vector<double> monic_from_roots(std::mt19937_64& rng, int degree,
                                     double max_modulus) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Polynomial poly(std::vector<double>{1.0});
    int remaining = degree;
    while (remaining > 0) {
        if (remaining >= 2 && unit(rng) < 0.5) {
            const double radius = max_modulus * unit(rng);
            const double angle = std::numbers::pi * unit(rng);
            poly = poly_mul(
                poly, Polynomial({1.0, -2.0 * radius * std::cos(angle),
                                  radius * radius}));
            remaining -= 2;
        } else {
            const double root = max_modulus * (2.0 * unit(rng) - 1.0);
            poly = poly_mul(poly, Polynomial({1.0, -root}));
            remaining -= 1;
        }
    }
    return poly.coeffs;
}

}  // namespace

PlantParameters sample_minimum_phase_plant(std::mt19937_64& rng,
                                           const PlantSampleOptions& options) {
    if (options.n < 0 || options.m < 0 || options.d < 1) {
        throw std::invalid_argument(
            "sample_minimum_phase_plant: invalid orders");
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    PlantParameters p;
    p.d = options.d;
    const double a_cap = options.stable_a ? options.max_a_root : 1.05;
    const std::vector<double> a_monic = monic_from_roots(rng, options.n, a_cap);
    p.a.assign(a_monic.begin() + 1, a_monic.end());

    const std::vector<double> b_monic =
        monic_from_roots(rng, options.m, options.max_b_zero);
    const double b0 =
        options.b0_min + (options.b0_max - options.b0_min) * unit(rng);
    p.b.resize(static_cast<std::size_t>(options.m) + 1);
    for (std::size_t i = 0; i < p.b.size(); ++i) {
        p.b[i] = b0 * b_monic[i];
    }
    p.validate();
    return p;
}

PlantParameters sample_plant_from_family(std::mt19937_64& rng,
                                         const PlantCoefficientBox& family) {
    family.validate();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    PlantParameters p;
    p.d = family.d;
    p.a.resize(family.a_lower.size());
    for (std::size_t i = 0; i < p.a.size(); ++i) {
        p.a[i] = family.a_lower[i] +
                 (family.a_upper[i] - family.a_lower[i]) * unit(rng);
    }
    p.b.resize(family.b_lower.size());
    for (std::size_t i = 0; i < p.b.size(); ++i) {
        p.b[i] = family.b_lower[i] +
                 (family.b_upper[i] - family.b_lower[i]) * unit(rng);
    }
    p.validate();
    return p;
}

ParameterBox box_around(const Eigen::VectorXd& theta_star,
                        Eigen::Index gain_index, std::mt19937_64& rng) {
    if (gain_index < 0 || gain_index >= theta_star.size()) {
        throw std::invalid_argument("box_around: gain index out of range");
    }
    std::uniform_real_distribution<double> margin(0.3, 1.5);
    ParameterBox S;
    S.lower.resize(theta_star.size());
    S.upper.resize(theta_star.size());
    S.gain_index = gain_index;
    for (Eigen::Index i = 0; i < theta_star.size(); ++i) {
        const double half_width = margin(rng);
        S.lower(i) = theta_star(i) - half_width;
        S.upper(i) = theta_star(i) + half_width;
    }
    // Keep the gain interval away from zero while containing the truth.
    const double gain = theta_star(gain_index);
    if (gain > 0.0) {
        S.lower(gain_index) = std::max(S.lower(gain_index), 0.25 * gain);
    } else {
        S.upper(gain_index) = std::min(S.upper(gain_index), 0.25 * gain);
    }
    S.validate();
    return S;
}

Eigen::VectorXd random_point_in_box(std::mt19937_64& rng,
                                    const ParameterBox& S) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::VectorXd theta(S.dim());
    for (Eigen::Index i = 0; i < S.dim(); ++i) {
        theta(i) = S.lower(i) + (S.upper(i) - S.lower(i)) * unit(rng);
    }
    return theta;
}

InitialCondition random_initial_condition(std::mt19937_64& rng, int n, int m,
                                          int d, double norm) {
    InitialCondition x0 = InitialCondition::zero(n, m, d);
    const std::size_t total = x0.y_hist.size() + x0.u_hist.size();
    if (total == 0 || norm == 0.0) return x0;

    std::normal_distribution<double> gauss(0.0, 1.0);
    double norm_sq = 0.0;
    do {
        norm_sq = 0.0;
        for (double& v : x0.y_hist) {
            v = gauss(rng);
            norm_sq += v * v;
        }
        for (double& v : x0.u_hist) {
            v = gauss(rng);
            norm_sq += v * v;
        }
    } while (norm_sq < 1e-6);

    const double scale = norm / std::sqrt(norm_sq);
    for (double& v : x0.y_hist) v *= scale;
    for (double& v : x0.u_hist) v *= scale;
    return x0;
}

// ---------------------------------------------------------------------------
// Running and verifying
// ---------------------------------------------------------------------------

ExperimentConfig make_plant_config(const PlantParameters& plant,
                                   const ParameterBox& box,
                                   const Eigen::VectorXd& theta0, double delta,
                                   const SignalSpec& reference,
                                   const SignalSpec& disturbance,
                                   const InitialCondition& x0, std::int64_t t0,
                                   std::int64_t horizon) {
    ExperimentConfig c;
    c.t0 = t0;
    c.horizon = horizon;
    c.plant = PlantSchedule::constant(plant);
    c.box = box;
    c.delta = delta;
    c.theta0 = theta0;
    c.reference = reference;
    c.disturbance = disturbance;
    c.x0 = x0;
    c.validate();
    return c;
}

SimulationTrace run_experiment(const ExperimentConfig& config) {
    config.validate();
    return closed_loop_run(config.plant, config.estimator(), config.reference,
                           config.disturbance, config.x0, config.t0,
                           config.horizon);
}

SimulationTrace trace_from_table(const ExperimentConfig& config,
                                 TraceTable table) {
    SimulationTrace trace;
    trace.n = config.plant.n();
    trace.m = config.plant.m();
    trace.d = config.plant.d;
    trace.x0 = config.x0;
    trace.t0 = table.rows.empty() ? config.t0 : table.rows.front().t;
    trace.rows = std::move(table.rows);
    if (table.theta_dim != trace.theta_dim()) {
        throw std::invalid_argument(
            "trace_from_table: estimate width does not match the config");
    }
    trace.validate();
    return trace;
}

bool VerificationReport::all_pass() const {
    for (const CheckResult& c : checks) {
        if (c.status == CheckResult::Status::kFail) return false;
    }
    return true;
}

namespace {

// Pinned verification tolerances.
constexpr double kColumnTol = 1e-9;      // relative, recomputed columns
constexpr double kIdentityTol = 1e-8;    // relative, per-step model identities
constexpr double kStructureTol = 1e-12;  // structural decomposition slacks
constexpr double kStepTol = 1e-10;       // estimator step-bound slack
constexpr double kVTol = 1e-9;           // telescoped descent slack
constexpr double kEnergyTol = 1e-6;      // zero-disturbance update energy

struct WorstDiff {
    double value = 0.0;
    std::int64_t t = 0;

    void update(double diff, std::int64_t at) {
        if (diff > value) {
            value = diff;
            t = at;
        }
    }
};

double rel_diff(double got, double want) {
    return std::abs(got - want) / (1.0 + std::abs(want));
}

}  // namespace

VerificationReport verify_trace(const ExperimentConfig& config,
                                const SimulationTrace& trace) {
    config.validate();
    VerificationReport report;
    const auto add = [&](const std::string& name, CheckResult::Status status,
                         std::string detail) {
        report.checks.push_back({name, status, std::move(detail)});
    };
    const auto add_bool = [&](const std::string& name, bool ok,
                              std::string detail) {
        add(name,
            ok ? CheckResult::Status::kPass : CheckResult::Status::kFail,
            std::move(detail));
    };

    // -- shape ---------------------------------------------------------
    const int n = config.plant.n();
    const int m = config.plant.m();
    const int d = config.plant.d;
    try {
        trace.validate();
        if (trace.t0 != config.t0 || trace.n != n || trace.m != m ||
            trace.d != d) {
            throw std::invalid_argument("run context mismatch");
        }
        if (static_cast<std::int64_t>(trace.rows.size()) > config.horizon) {
            throw std::invalid_argument("more rows than the horizon");
        }
        if (trace.x0.y_hist != config.x0.y_hist ||
            trace.x0.u_hist != config.x0.u_hist) {
            throw std::invalid_argument("initial condition mismatch");
        }
    } catch (const std::exception& e) {
        add("trace-shape", CheckResult::Status::kFail, e.what());
        return report;
    }
    add("trace-shape", CheckResult::Status::kPass,
        detail_fmt("%zu rows from t=%lld", trace.rows.size(),
                   static_cast<long long>(trace.t0)));
    if (trace.rows.empty()) return report;

    const RegressorHistory history = replay_history(trace);
    const std::int64_t t_last =
        trace.t0 + static_cast<std::int64_t>(trace.rows.size()) - 1;
    const bool time_invariant = config.plant.time_invariant();
    EstimatorConfig est = config.estimator();
    est.validate_and_project();

    Eigen::VectorXd theta_star;
    bool theta_star_in_box = false;
    if (time_invariant) {
        theta_star = to_predictor(config.plant.at(trace.t0)).theta.stacked();
        theta_star_in_box =
            !((theta_star.array() < est.S.lower.array()).any() ||
              (theta_star.array() > est.S.upper.array()).any());
    }

    // -- column recomputation -------------------------------------------
    WorstDiff exo, derived, estimator_cols, control_col, output_col;
    bool gate_mismatch = false;
    std::int64_t gate_mismatch_t = 0;

    Eigen::VectorXd theta_prev = est.theta0;
    for (const TraceRecord& r : trace.rows) {
        const std::int64_t t = r.t;

        exo.update(rel_diff(r.ystar, config.reference(t)), t);
        exo.update(rel_diff(r.w, config.disturbance(t)), t);

        derived.update(rel_diff(r.eps, r.ystar - r.y), t);

        const PredictorForm form_now = to_predictor(config.plant.at(t));
        std::vector<double> w_window(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) {
            const std::int64_t tau = t - d + 1 + i;  // ascending time order
            w_window[static_cast<std::size_t>(i)] =
                tau >= trace.t0
                    ? trace.rows[static_cast<std::size_t>(tau - trace.t0)].w
                    : config.disturbance(tau);
        }
        derived.update(rel_diff(r.wbar, wbar(form_now.F, w_window)), t);

        const Eigen::VectorXd truth_now =
            to_predictor(config.plant.at(t + d)).theta.stacked();
        derived.update(
            rel_diff(r.V, (r.theta_hat - truth_now).squaredNorm()), t);

        const Eigen::VectorXd phi_lag = history.phi(t - d);
        const EstimatorStep step =
            estimator_update(theta_prev, phi_lag, r.y, est);
        estimator_cols.update(rel_diff(r.e, step.e), t);
        estimator_cols.update(rel_diff(r.nu, step.nu), t);
        estimator_cols.update(
            (r.theta_hat - step.theta_hat).norm() /
                (1.0 + step.theta_hat.norm()),
            t);
        if (r.rho != step.rho && !gate_mismatch) {
            gate_mismatch = true;
            gate_mismatch_t = t;
        }

        control_col.update(
            rel_diff(r.u, control_input(r.theta_hat, history, t,
                                        config.reference(t + d), est.S)),
            t);

        std::vector<double> y_hist(static_cast<std::size_t>(n));
        for (int i = 1; i <= n; ++i) {
            y_hist[static_cast<std::size_t>(i - 1)] = history.y(t - i);
        }
        std::vector<double> u_hist(static_cast<std::size_t>(m) + 1);
        for (int i = 0; i <= m; ++i) {
            u_hist[static_cast<std::size_t>(i)] = history.u(t - d - i);
        }
        output_col.update(
            rel_diff(r.y, plant_step(config.plant.at(t), y_hist, u_hist, r.w)),
            t);

        theta_prev = r.theta_hat;
    }

    const auto add_column = [&](const char* name, const WorstDiff& worst) {
        add_bool(name, worst.value <= kColumnTol,
                 detail_fmt("worst rel. diff %.3g at t=%lld (tol %.1g)",
                            worst.value, static_cast<long long>(worst.t),
                            kColumnTol));
    };
    add_column("exogenous-columns", exo);
    add_column("derived-columns", derived);
    add_column("estimator-columns", estimator_cols);
    add_bool("gate-column", !gate_mismatch,
             gate_mismatch
                 ? detail_fmt("gate value differs from recomputation at "
                              "t=%lld",
                              static_cast<long long>(gate_mismatch_t))
                 : "gate values match recomputation");
    add_column("control-column", control_col);
    add_column("output-column", output_col);

    // -- estimator inequalities ------------------------------------------
    const bool use_truth = time_invariant && theta_star_in_box;
    const EstimatorBoundReport bounds = check_estimator_bounds(
        trace, history, est, use_truth ? &theta_star : nullptr, kStepTol,
        kVTol);

    add_bool("estimator-step-bound", bounds.step_ok,
             detail_fmt("worst slack %.3g at t=%lld (tol -%.1g)",
                        bounds.worst_step_slack,
                        static_cast<long long>(bounds.worst_step_t),
                        kStepTol));
    if (use_truth) {
        add_bool("parameter-error-descent", bounds.v_ok,
                 detail_fmt("worst slack %.3g at t=%lld (tol -%.1g)",
                            bounds.worst_v_slack,
                            static_cast<long long>(bounds.worst_v_t), kVTol));
    } else {
        add("parameter-error-descent", CheckResult::Status::kSkip,
            time_invariant ? "true parameter lies outside the box"
                           : "schedule is time-varying");
    }
    add_bool("estimator-gate-freeze", bounds.gate_ok,
             "estimate frozen on gated-off steps");
    add_bool("estimator-box", bounds.box_ok,
             "estimates inside the box at every step");

    // The energy budget needs every prediction-error row to be free of
    // model discrepancy: zero disturbance, and (for d > 1) an initial
    // history the undisturbed plant could have produced itself.
    const bool energy_applies = use_truth &&
                                config.disturbance.identically_zero() &&
                                (d == 1 || trace.x0.norm() == 0.0);
    if (energy_applies) {
        const double budget = 8.0 * box_norm(est.S) * box_norm(est.S);
        add_bool("update-energy", bounds.nu_sq_sum <= budget + kEnergyTol,
                 detail_fmt("sum nu^2 = %.6g, budget %.6g (tol %.1g)",
                            bounds.nu_sq_sum, budget, kEnergyTol));
    } else if (use_truth && config.disturbance.identically_zero()) {
        add("update-energy", CheckResult::Status::kSkip,
            "initial history predates the recursion (d > 1)");
    } else {
        add("update-energy", CheckResult::Status::kSkip,
            use_truth ? "disturbance is not identically zero"
                      : "needs a time-invariant truth inside the box");
    }

    // -- error identities (need a fixed truth) ----------------------------
    if (time_invariant) {
        bool consistent = trace.x0.norm() == 0.0;
        for (std::int64_t tau = trace.t0 - d + 1; consistent && tau < trace.t0;
             ++tau) {
            consistent = config.disturbance(tau) == 0.0;
        }
        const std::int64_t e_start =
            (d == 1 || consistent) ? trace.t0 : trace.t0 + d - 1;
        const ErrorIdentityReport ids = check_error_identities(
            trace, history, theta_star, est.theta0, e_start);
        const double tol =
            kIdentityTol * (1.0 + max_phi_norm(trace, history));
        add_bool("prediction-error-identity", ids.worst_e_residual <= tol,
                 detail_fmt("worst residual %.3g from t=%lld (tol %.3g)",
                            ids.worst_e_residual,
                            static_cast<long long>(e_start), tol));
        if (t_last >= trace.t0 + d) {
            add_bool("tracking-error-identity", ids.worst_eps_residual <= tol,
                     detail_fmt("worst residual %.3g (tol %.3g)",
                                ids.worst_eps_residual, tol));
        } else {
            add("tracking-error-identity", CheckResult::Status::kSkip,
                "trace shorter than the delay lookahead");
        }
    } else {
        add("prediction-error-identity", CheckResult::Status::kSkip,
            "schedule is time-varying");
        add("tracking-error-identity", CheckResult::Status::kSkip,
            "schedule is time-varying");
    }

    // -- per-step regressor models ----------------------------------------
    if (time_invariant) {
        const ModelIdentityReport good = check_error_driven_identity(
            trace, history, config.plant.at(trace.t0));
        if (good.steps_checked > 0) {
            add_bool("output-error-model", good.worst_residual <= kIdentityTol,
                     detail_fmt("worst rel. residual %.3g at t=%lld over %lld "
                                "steps (tol %.1g)",
                                good.worst_residual,
                                static_cast<long long>(good.worst_t),
                                static_cast<long long>(good.steps_checked),
                                kIdentityTol));
        } else {
            add("output-error-model", CheckResult::Status::kSkip,
                "trace shorter than the d+1 lookahead");
        }
    } else {
        add("output-error-model", CheckResult::Status::kSkip,
            "schedule is time-varying");
    }

    const ModelIdentityReport crude =
        check_estimate_driven_identity(trace, history, config.plant, est.S);
    if (crude.steps_checked > 0) {
        add_bool("estimate-driven-model", crude.worst_residual <= kIdentityTol,
                 detail_fmt("worst rel. residual %.3g at t=%lld over %lld "
                            "steps (tol %.1g)",
                            crude.worst_residual,
                            static_cast<long long>(crude.worst_t),
                            static_cast<long long>(crude.steps_checked),
                            kIdentityTol));
    } else {
        add("estimate-driven-model", CheckResult::Status::kSkip,
            "trace shorter than the d+1 lookahead");
    }

    // -- gated decomposition ----------------------------------------------
    if (!time_invariant) {
        add("update-decomposition", CheckResult::Status::kSkip,
            "schedule is time-varying");
        add("decomposition-structure", CheckResult::Status::kSkip,
            "schedule is time-varying");
    } else if (t_last < trace.t0 + 2 * d) {
        add("update-decomposition", CheckResult::Status::kSkip,
            "trace shorter than the d+1 lookahead");
        add("decomposition-structure", CheckResult::Status::kSkip,
            "trace shorter than the d+1 lookahead");
    } else {
        const DecompositionReport dec = check_decomposition(
            trace, history, config.plant.at(trace.t0), est.S, est.delta);
        add_bool(
            "update-decomposition",
            dec.worst_residual <= kIdentityTol &&
                dec.worst_extended_residual <= kIdentityTol,
            detail_fmt("worst rel. residual %.3g, stacked %.3g over %lld "
                       "anchors (tol %.1g)",
                       dec.worst_residual, dec.worst_extended_residual,
                       static_cast<long long>(dec.steps_checked),
                       kIdentityTol));
        add_bool(
            "decomposition-structure",
            dec.worst_rank1_slack <= kStructureTol &&
                dec.worst_nubar_slack <= kStructureTol &&
                dec.worst_eta0_slack <= kStructureTol,
            detail_fmt("rank-one %.3g, update-window %.3g, leakage %.3g "
                       "(tol %.1g)",
                       dec.worst_rank1_slack, dec.worst_nubar_slack,
                       dec.worst_eta0_slack, kStructureTol));
    }

    return report;
}

// ---------------------------------------------------------------------------
// Multi-plant stability sweep
// ---------------------------------------------------------------------------

EstimateDrivenNorms estimate_driven_box_sup(const PlantParameters& p,
                                            const ParameterBox& S) {
    p.validate();
    S.validate();
    const int dim = p.dim();
    if (S.dim() != dim) {
        throw std::invalid_argument(
            "estimate_driven_box_sup: box/plant dimension mismatch");
    }
    if (dim > 16) {
        throw std::invalid_argument(
            "estimate_driven_box_sup: corner enumeration limited to 16 dims");
    }
    EstimateDrivenNorms norms;
    Eigen::VectorXd corner(dim);
    for (std::uint32_t mask = 0; mask < (1u << dim); ++mask) {
        for (int i = 0; i < dim; ++i) {
            corner(i) = ((mask >> i) & 1u) ? S.upper(i) : S.lower(i);
        }
        const EstimateDrivenModel model =
            build_estimate_driven_model(p, corner, S);
        norms.max_A = std::max(norms.max_A, model.A.norm());
        norms.max_B_ref = std::max(norms.max_B_ref, model.B_ref.norm());
        norms.max_B_dist = std::max(norms.max_B_dist, model.B_dist.norm());
    }
    return norms;
}

bool SweepReport::all_fits_stable() const {
    for (const PlantStudy& study : plants) {
        if (study.excluded) continue;
        if (!study.fit.feasible || study.fit.lambda >= 1.0) return false;
    }
    return true;
}

namespace {

/** Every corner of the coefficient box, in a fixed deterministic order. */
std::vector<PlantParameters> family_corners(const PlantCoefficientBox& family,
                                            std::size_t cap) {
    const int coords = family.n() + family.m() + 1;
    std::vector<PlantParameters> corners;
    if (coords > 20) return corners;  // too many to enumerate; sampling only
    const std::uint64_t total = 1ull << coords;
    for (std::uint64_t mask = 0; mask < total && corners.size() < cap;
         ++mask) {
        PlantParameters p;
        p.d = family.d;
        p.a.resize(family.a_lower.size());
        int bit = 0;
        for (std::size_t i = 0; i < p.a.size(); ++i, ++bit) {
            p.a[i] = ((mask >> bit) & 1ull) ? family.a_upper[i]
                                            : family.a_lower[i];
        }
        p.b.resize(family.b_lower.size());
        for (std::size_t i = 0; i < p.b.size(); ++i, ++bit) {
            p.b[i] = ((mask >> bit) & 1ull) ? family.b_upper[i]
                                            : family.b_lower[i];
        }
        corners.push_back(std::move(p));
    }
    return corners;
}

void max_into(EstimateDrivenNorms& target, const EstimateDrivenNorms& src) {
    target.max_A = std::max(target.max_A, src.max_A);
    target.max_B_ref = std::max(target.max_B_ref, src.max_B_ref);
    target.max_B_dist = std::max(target.max_B_dist, src.max_B_dist);
}

}  // namespace

SweepReport run_stability_sweep(const PlantCoefficientBox& family,
                                const StudyOptions& options) {
    family.validate();
    if (options.n_plants < 1) {
        throw std::invalid_argument("run_stability_sweep: need n_plants >= 1");
    }
    const ParameterBox box = predictor_box_from_coefficients(family);
    const int n = family.n();
    const int m = family.m();
    const int d = family.d;

    // The coefficient-box corners come first (when requested): the norm
    // suprema below are convex in the plant coefficients, so the corner set
    // pins the family aggregate deterministically; the remaining plants are
    // random draws.
    std::vector<PlantParameters> plants;
    if (options.include_corners) {
        plants = family_corners(family,
                                static_cast<std::size_t>(options.n_plants));
    }
    for (std::size_t i = plants.size();
         i < static_cast<std::size_t>(options.n_plants); ++i) {
        std::mt19937_64 rng(derive_seed(options.seed, 0x70000000ull + i));
        plants.push_back(sample_plant_from_family(rng, family));
    }

    SweepReport report;
    report.plants.reserve(plants.size());

    for (std::size_t i = 0; i < plants.size(); ++i) {
        PlantStudy study;
        study.plant = plants[i];
        study.zero_modulus = max_zero_modulus(study.plant.B_poly());
        if (study.zero_modulus >= 1.0) {
            study.excluded = true;
            ++report.excluded;
            report.plants.push_back(std::move(study));
            continue;
        }
        report.lambda_under = std::max(report.lambda_under,
                                       study.zero_modulus);
        study.box_sup = estimate_driven_box_sup(study.plant, box);

        const std::uint64_t plant_stream = derive_seed(options.seed, i);
        const PlantSchedule schedule = PlantSchedule::constant(study.plant);
        const int total_runs = options.fit_runs + options.holdout_runs;
        std::vector<DecayRun> fit_runs, holdout_runs;
        fit_runs.reserve(static_cast<std::size_t>(options.fit_runs));
        holdout_runs.reserve(static_cast<std::size_t>(options.holdout_runs));

        // The initial estimate is pinned at the box midpoint so run-to-run
        // variation comes from the initial condition alone; the bound is
        // uniform over admissible initial estimates, so any fixed choice is
        // a valid instance and this one keeps the fitted constant stable.
        const Eigen::VectorXd theta0 = 0.5 * (box.lower + box.upper);
        for (int r = 0; r < total_runs; ++r) {
            std::mt19937_64 rng(
                derive_seed(plant_stream, static_cast<std::uint64_t>(r)));
            ExperimentConfig cfg = make_plant_config(
                study.plant, box, theta0,
                std::numeric_limits<double>::infinity(), SignalSpec::zero(),
                SignalSpec::zero(),
                random_initial_condition(rng, n, m, d, 1.0), 0,
                options.horizon);
            const SimulationTrace trace = run_experiment(cfg);
            const RegressorHistory history = replay_history(trace);
            max_into(study.observed,
                     estimate_driven_norms(trace, schedule, box));
            DecayRun run = make_decay_run(trace, history, cfg.reference);
            if (r < options.fit_runs) {
                fit_runs.push_back(std::move(run));
            } else {
                holdout_runs.push_back(std::move(run));
            }
        }

        study.fit = fit_convolution_bound(fit_runs, study.zero_modulus);
        if (study.fit.feasible && !holdout_runs.empty()) {
            study.violations =
                count_bound_violations(study.fit, holdout_runs,
                                       options.margin);
        }

        if (study.fit.feasible) {
            report.max_lambda_hat =
                std::max(report.max_lambda_hat, study.fit.lambda);
            report.max_c = std::max(report.max_c, study.fit.c);
        } else {
            report.max_lambda_hat = 1.0;
        }
        report.total_violations += study.violations;
        max_into(report.max_box_sup, study.box_sup);
        max_into(report.max_observed, study.observed);
        report.plants.push_back(std::move(study));
    }
    return report;
}

}  // namespace dstep
