// SPDX-License-Identifier: MIT
//
// Acceptance suite for the adaptive tracking-control testbench.  Each
// criterion exercises one guaranteed property end to end and prints a
// single PASS/FAIL line; the binary exits 0 only when every criterion
// passes.  All tolerances are pinned here.
//
//  1. predictor-form-equivalence   direct and predictor-form recursions
//                                  produce the same outputs
//  2. estimator-inequality-suite   per-step motion bound and telescoped
//                                  squared-error descent on randomized runs
//  3. update-energy-budget         summed squared update magnitudes stay
//                                  within the zero-disturbance budget
//  4. closed-loop-spectrum         the nominal regressor-update matrix has
//                                  exactly the input zeros plus an origin
//                                  cluster as its spectrum
//  5. model-identity-suite         per-step update models, the gated
//                                  decomposition, and the error identities
//                                  reproduce recorded traces
//  6. exponential-stability-sweep  fitted decaying envelopes hold on
//                                  held-out runs for random family plants
//  7. l2-tracking-convergence      cumulative squared tracking error
//                                  saturates, with reproducible ratios
//  8. bundled-demo-reproduction    the bundled demo degrades during the
//                                  disturbance window and recovers after
//  9. norm-bound-determinism       certified model-norm bounds are finite,
//                                  seed-stable, and dominate observations

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include <dstep/analysis.hpp>
#include <dstep/controller.hpp>
#include <dstep/estimator.hpp>
#include <dstep/experiments.hpp>
#include <dstep/plant.hpp>
#include <dstep/polynomial.hpp>
#include <dstep/signals.hpp>
#include <dstep/trace.hpp>

namespace {

using namespace dstep;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Criterion {
    std::string name;
    bool ok = false;
    std::string detail;
};

std::string fmt(const char* format, ...) {
    char buffer[320];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buffer, sizeof(buffer), format, args);
    va_end(args);
    return buffer;
}

// ---------------------------------------------------------------------------
// 1. Direct vs predictor-form recursion
// ---------------------------------------------------------------------------

Criterion predictor_form_equivalence() {
    constexpr int kPlants = 100;
    constexpr int kOutputs = 500;
    constexpr double kTol = 1e-8;

    std::mt19937_64 rng(0x5eed0001ull);
    std::uniform_int_distribution<int> n_pick(0, 4);
    std::uniform_int_distribution<int> m_pick(0, 3);
    std::uniform_int_distribution<int> d_pick(1, 3);
    std::uniform_real_distribution<double> input(-1.0, 1.0);
    std::uniform_real_distribution<double> noise(-0.25, 0.25);

    double worst = 0.0;
    for (int trial = 0; trial < kPlants; ++trial) {
        PlantSampleOptions options;
        options.n = n_pick(rng);
        options.m = m_pick(rng);
        options.d = d_pick(rng);
        options.stable_a = true;  // keeps the open loop bounded over 500 steps
        const PlantParameters p = sample_minimum_phase_plant(rng, options);
        const PredictorForm form = to_predictor(p);
        const int n = p.n(), m = p.m(), d = p.d;

        // Time index t lives at buffer slot t + lag; the prefix is the
        // all-zero trajectory, which satisfies the recursion exactly, so
        // the predictor identity holds from the first produced output.
        const int lag = n + m + 2 * d + 2;
        const int total = kOutputs + d + lag + 1;
        std::vector<double> y(total, 0.0), u(total, 0.0), w(total, 0.0);
        for (int t = 0; t < kOutputs + d; ++t) {
            u[t + lag] = input(rng);
            w[t + lag] = noise(rng);
        }

        std::vector<double> yh(n), uh(m + 1);
        for (int t = 0; t < kOutputs + d; ++t) {
            for (int i = 0; i < n; ++i) yh[i] = y[t + lag - 1 - i];
            for (int i = 0; i <= m; ++i) uh[i] = u[t + lag - d - i];
            y[t + lag] = plant_step(p, yh, uh, w[t + lag]);
        }

        Eigen::VectorXd phi(p.dim());
        std::vector<double> window(d);
        for (int t = 0; t < kOutputs; ++t) {
            for (int i = 0; i < n; ++i) phi(i) = y[t + lag - i];
            for (int i = 0; i < m + d; ++i) phi(n + i) = u[t + lag - i];
            for (int j = 0; j < d; ++j) window[j] = w[t + lag + 1 + j];
            const double predicted =
                predictor_step(form.theta, phi, wbar(form.F, window));
            worst = std::max(worst, std::abs(y[t + d + lag] - predicted));
        }
    }
    return {"predictor-form-equivalence", worst <= kTol,
            fmt("worst |direct - predictor| %.3g over %d plants x %d outputs "
                "(tol %.1g)",
                worst, kPlants, kOutputs, kTol)};
}

// ---------------------------------------------------------------------------
// 2. Estimator step bound and telescoped descent
// ---------------------------------------------------------------------------

Criterion estimator_inequality_suite() {
    constexpr int kRuns = 200;
    constexpr double kSlackTol = 1e-9;

    std::mt19937_64 rng(0x5eed0002ull);
    std::uniform_real_distribution<double> amp(0.1, 1.5);
    std::uniform_real_distribution<double> freq(0.2, 2.5);
    std::uniform_real_distribution<double> x0_norm(0.0, 2.0);

    bool ok = true;
    double worst_step = kInf, worst_v = kInf;
    for (int run = 0; run < kRuns; ++run) {
        PlantSampleOptions options;
        options.n = run % 4;
        options.m = (run / 2) % 3;
        options.d = 1 + run % 3;
        options.stable_a = (run / 4) % 2 == 0;
        const PlantParameters p = sample_minimum_phase_plant(rng, options);
        const Eigen::VectorXd theta_star = to_predictor(p).theta.stacked();
        const ParameterBox box = box_around(theta_star, p.n(), rng);

        const double delta = (run % 2 == 0) ? kInf : 1.0;
        const SignalSpec reference = SignalSpec::cosine(amp(rng), freq(rng));
        const SignalSpec disturbance =
            (run % 4 < 2) ? SignalSpec::zero()
                          : SignalSpec::cosine(0.4 * amp(rng), freq(rng));
        const ExperimentConfig config = make_plant_config(
            p, box, random_point_in_box(rng, box), delta, reference,
            disturbance,
            random_initial_condition(rng, p.n(), p.m(), p.d, x0_norm(rng)),
            /*t0=*/0, /*horizon=*/120);

        const SimulationTrace trace = run_experiment(config);
        const RegressorHistory history = replay_history(trace);
        EstimatorConfig estimator = config.estimator();
        estimator.validate_and_project();
        const EstimatorBoundReport report = check_estimator_bounds(
            trace, history, estimator, &theta_star, kSlackTol, kSlackTol);

        ok = ok && report.step_ok && report.v_ok && report.gate_ok &&
             report.box_ok;
        worst_step = std::min(worst_step, report.worst_step_slack);
        worst_v = std::min(worst_v, report.worst_v_slack);
    }
    return {"estimator-inequality-suite", ok,
            fmt("worst step slack %.3g, descent slack %.3g over %d runs "
                "(tol %.1g)",
                worst_step, worst_v, kRuns, -kSlackTol)};
}

// ---------------------------------------------------------------------------
// 3. Zero-disturbance update energy
// ---------------------------------------------------------------------------

Criterion update_energy_budget() {
    constexpr int kRuns = 120;
    constexpr double kEnergyTol = 1e-6;

    std::mt19937_64 rng(0x5eed0003ull);
    std::uniform_real_distribution<double> amp(0.1, 1.5);
    std::uniform_real_distribution<double> freq(0.2, 2.5);
    std::uniform_real_distribution<double> x0_norm(0.0, 2.0);

    bool ok = true;
    double worst_margin = kInf;
    for (int run = 0; run < kRuns; ++run) {
        PlantSampleOptions options;
        options.n = run % 4;
        options.m = (run / 2) % 3;
        options.d = 1 + run % 3;
        options.stable_a = (run / 4) % 2 == 0;
        const PlantParameters p = sample_minimum_phase_plant(rng, options);
        const Eigen::VectorXd theta_star = to_predictor(p).theta.stacked();
        const ParameterBox box = box_around(theta_star, p.n(), rng);

        // The budget telescopes the squared parameter error through every
        // update, so the run must be free of discrepancies from the first
        // update on: unit-delay runs are automatically, deeper delays get
        // the all-zero (recursion-consistent) initial history.
        const InitialCondition x0 =
            (p.d == 1)
                ? random_initial_condition(rng, p.n(), p.m(), p.d,
                                           x0_norm(rng))
                : InitialCondition::zero(p.n(), p.m(), p.d);
        const ExperimentConfig config = make_plant_config(
            p, box, random_point_in_box(rng, box),
            (run % 2 == 0) ? kInf : 1.0, SignalSpec::cosine(amp(rng), freq(rng)),
            SignalSpec::zero(), x0, /*t0=*/0, /*horizon=*/300);

        const SimulationTrace trace = run_experiment(config);
        const RegressorHistory history = replay_history(trace);
        EstimatorConfig estimator = config.estimator();
        estimator.validate_and_project();
        const EstimatorBoundReport report = check_estimator_bounds(
            trace, history, estimator, &theta_star);

        const double budget = 8.0 * box_norm(box) * box_norm(box);
        const double margin = budget + kEnergyTol - report.nu_sq_sum;
        ok = ok && margin >= 0.0;
        worst_margin = std::min(worst_margin, margin);
    }
    return {"update-energy-budget", ok,
            fmt("smallest budget headroom %.4g over %d zero-disturbance runs "
                "(tol %.1g)",
                worst_margin, kRuns, kEnergyTol)};
}

// ---------------------------------------------------------------------------
// 4. Spectrum of the nominal regressor-update matrix
// ---------------------------------------------------------------------------

Criterion closed_loop_spectrum() {
    constexpr int kPlants = 100;
    constexpr double kTol = 1e-6;

    std::mt19937_64 rng(0x5eed0004ull);
    std::uniform_int_distribution<int> n_pick(0, 4);
    std::uniform_int_distribution<int> m_pick(0, 3);
    std::uniform_int_distribution<int> d_pick(1, 3);

    // The origin eigenvalue has multiplicity n + d and is defective, so a
    // direct eigensolve scatters it by O(eps^(1/(n+d))) -- far beyond the
    // tolerance.  The characteristic polynomial is an exact certificate of
    // the same multiset claim: det(zI - A) = z^(n+d) (z^m + sum (b_i/b_0)
    // z^(m-i)), whose roots are the input zeros plus the origin cluster.
    double worst = 0.0;
    for (int trial = 0; trial < kPlants; ++trial) {
        PlantSampleOptions options;
        options.n = n_pick(rng);
        options.m = m_pick(rng);
        options.d = d_pick(rng);
        const PlantParameters p = sample_minimum_phase_plant(rng, options);
        const ErrorDrivenModel model = build_error_driven_model(p);
        const std::vector<double> coeffs =
            characteristic_polynomial(model.A);

        const int dim = p.dim();
        for (int i = 1; i <= dim; ++i) {
            const double expected =
                (i <= p.m()) ? p.b[static_cast<std::size_t>(i)] / p.b[0] : 0.0;
            const double residual =
                std::abs(coeffs[static_cast<std::size_t>(i)] - expected) /
                (1.0 + std::abs(expected));
            worst = std::max(worst, residual);
        }
    }
    return {"closed-loop-spectrum", worst <= kTol,
            fmt("input zeros + %s-fold origin cluster certified; worst "
                "characteristic-coefficient residual %.3g over %d plants "
                "(tol %.1g)",
                "(n+d)", worst, kPlants, kTol)};
}

// ---------------------------------------------------------------------------
// 5. Per-step model identities and the gated decomposition
// ---------------------------------------------------------------------------

Criterion model_identity_suite() {
    constexpr int kRuns = 60;
    constexpr double kIdentityTol = 1e-8;
    constexpr double kStructureTol = 1e-12;

    std::mt19937_64 rng(0x5eed0005ull);
    std::uniform_real_distribution<double> amp(0.1, 1.2);
    std::uniform_real_distribution<double> freq(0.2, 2.5);
    std::uniform_real_distribution<double> x0_norm(0.0, 1.0);

    bool ok = true;
    double worst_model = 0.0;    // relative model/decomposition residuals
    double worst_struct = 0.0;   // structural slacks
    double worst_error_id = 0.0; // scaled error-identity residuals
    for (int run = 0; run < kRuns; ++run) {
        PlantSampleOptions options;
        options.n = run % 4;
        options.m = (run / 2) % 3;
        options.d = 1 + run % 3;
        options.stable_a = (run / 4) % 2 == 0;
        const PlantParameters p = sample_minimum_phase_plant(rng, options);
        const Eigen::VectorXd theta_star = to_predictor(p).theta.stacked();
        const ParameterBox box = box_around(theta_star, p.n(), rng);
        const double delta =
            (run % 3 == 0) ? 0.75 : ((run % 3 == 1) ? 2.0 : kInf);
        const SignalSpec disturbance =
            (run % 2 == 0) ? SignalSpec::zero()
                           : SignalSpec::cosine(0.3 * amp(rng), freq(rng));

        const ExperimentConfig config = make_plant_config(
            p, box, random_point_in_box(rng, box), delta,
            SignalSpec::cosine(amp(rng), freq(rng)), disturbance,
            random_initial_condition(rng, p.n(), p.m(), p.d, x0_norm(rng)),
            /*t0=*/0, /*horizon=*/160);
        const SimulationTrace trace = run_experiment(config);
        const RegressorHistory history = replay_history(trace);

        const ModelIdentityReport nominal =
            check_error_driven_identity(trace, history, p);
        const ModelIdentityReport crude = check_estimate_driven_identity(
            trace, history, config.plant, box);
        const DecompositionReport dec =
            check_decomposition(trace, history, p, box, delta);

        // Prediction/tracking-error identities, scaled by the run's state
        // magnitude; rows before t0 + d - 1 mix the arbitrary initial
        // history into the filtered-disturbance column, so they are not
        // checkable against it.
        const ErrorIdentityReport ids = check_error_identities(
            trace, history, theta_star, config.theta0,
            trace.t0 + p.d - 1);
        const double scale = 1.0 + max_phi_norm(trace, history);

        worst_model = std::max({worst_model, nominal.worst_residual,
                                crude.worst_residual, dec.worst_residual,
                                dec.worst_extended_residual});
        worst_struct = std::max({worst_struct, dec.worst_rank1_slack,
                                 dec.worst_nubar_slack, dec.worst_eta0_slack});
        worst_error_id =
            std::max({worst_error_id, ids.worst_e_residual / scale,
                      ids.worst_eps_residual / scale});
        ok = ok && worst_model <= kIdentityTol &&
             worst_struct <= kStructureTol && worst_error_id <= kIdentityTol;
    }
    return {"model-identity-suite", ok,
            fmt("worst model residual %.3g, error-identity residual %.3g "
                "(tol %.1g); structural slack %.3g (tol %.1g) over %d runs",
                worst_model, worst_error_id, kIdentityTol, worst_struct,
                kStructureTol, kRuns)};
}

// ---------------------------------------------------------------------------
// 6. Exponential decay of the homogeneous closed loop
// ---------------------------------------------------------------------------

Criterion exponential_stability_sweep() {
    constexpr double kTimeBudgetSeconds = 60.0;

    StudyOptions options;
    options.n_plants = 50;
    options.fit_runs = 40;
    options.holdout_runs = 20;
    options.horizon = 300;
    options.seed = 0x5eed0006ull;
    options.margin = 2.0;
    options.include_corners = false;  // 50 random draws from the family box

    const auto started = std::chrono::steady_clock::now();
    const SweepReport report =
        run_stability_sweep(demo_coefficient_box(), options);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      started)
            .count();

    const bool ok = report.all_fits_stable() && report.max_lambda_hat < 1.0 &&
                    report.total_violations == 0 && report.excluded == 0 &&
                    elapsed < kTimeBudgetSeconds;
    return {"exponential-stability-sweep", ok,
            fmt("max fitted rate %.4f, held-out violations %d, excluded %d, "
                "%.1fs (budget %.0fs)",
                report.max_lambda_hat, report.total_violations,
                report.excluded, elapsed, kTimeBudgetSeconds)};
}

// ---------------------------------------------------------------------------
// 7. Cumulative squared tracking error saturates
// ---------------------------------------------------------------------------

Criterion l2_tracking_convergence() {
    constexpr int kSeeds = 20;
    constexpr double kTailTol = 1e-6;

    const PlantParameters plant = demo_midpoint_plant();
    const ParameterBox box = demo_predictor_box();

    const auto run_suite = [&]() {
        std::vector<L2Report> reports;
        reports.reserve(kSeeds);
        for (int seed = 0; seed < kSeeds; ++seed) {
            std::mt19937_64 rng(0x5eed0007ull + static_cast<std::uint64_t>(seed));
            const ExperimentConfig config = make_plant_config(
                plant, box, random_point_in_box(rng, box), kInf,
                SignalSpec::cosine(1.0, 1.0), SignalSpec::zero(),
                random_initial_condition(rng, plant.n(), plant.m(), plant.d,
                                         1.0),
                /*t0=*/0, /*horizon=*/2000);
            const SimulationTrace trace = run_experiment(config);
            reports.push_back(
                l2_tracking_check(trace, /*ystar_sup=*/1.0,
                                  /*tail_window=*/100));
        }
        return reports;
    };

    const std::vector<L2Report> first = run_suite();
    const std::vector<L2Report> again = run_suite();

    bool ok = true;
    double worst_tail = 0.0, worst_ratio = 0.0;
    for (int i = 0; i < kSeeds; ++i) {
        const L2Report& r = first[static_cast<std::size_t>(i)];
        const L2Report& r2 = again[static_cast<std::size_t>(i)];
        worst_tail = std::max(worst_tail, r.tail_increment);
        worst_ratio = std::max(worst_ratio, r.ratio);
        ok = ok && r.tail_increment < kTailTol && std::isfinite(r.ratio) &&
             r.cumulative == r2.cumulative && r.ratio == r2.ratio &&
             r.tail_increment == r2.tail_increment;
    }
    return {"l2-tracking-convergence", ok,
            fmt("largest tail increment %.3g (tol %.1g), largest "
                "energy-to-initial-data ratio %.4g, bit-identical rerun "
                "over %d seeds",
                worst_tail, kTailTol, worst_ratio, kSeeds)};
}

// ---------------------------------------------------------------------------
// 8. Bundled time-varying demo
// ---------------------------------------------------------------------------

Criterion bundled_demo_reproduction() {
    const ExperimentConfig config = demo_experiment();
    const SimulationTrace trace = run_experiment(config);
    const DemoSummary summary = summarize_demo(trace, config.box);
    const bool ok = summary.ordering_ok() && summary.estimates_in_box;
    return {"bundled-demo-reproduction", ok,
            fmt("rms tracking error %.4f -> %.4f (disturbance on) -> %.4f, "
                "estimates in box: %s",
                summary.rms_early, summary.rms_mid, summary.rms_late,
                summary.estimates_in_box ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
// 9. Model-norm bounds: finite, seed-stable, dominating
// ---------------------------------------------------------------------------

Criterion norm_bound_determinism() {
    constexpr double kSpreadTol = 0.01;  // < 1% across master seeds

    const auto sweep_once = [](std::uint64_t seed) {
        StudyOptions options;
        options.n_plants = 50;
        options.fit_runs = 6;
        options.holdout_runs = 4;
        options.horizon = 300;
        options.seed = seed;
        options.margin = 2.0;
        options.include_corners = true;  // pins the family-corner witnesses
        return run_stability_sweep(demo_coefficient_box(), options);
    };

    const std::vector<std::uint64_t> seeds{101, 202, 303};
    std::vector<SweepReport> reports;
    for (std::uint64_t seed : seeds) reports.push_back(sweep_once(seed));
    const SweepReport rerun = sweep_once(seeds[0]);

    const auto spread = [](double a, double b, double c) {
        const double hi = std::max({a, b, c});
        const double lo = std::min({a, b, c});
        return hi > 0.0 ? (hi - lo) / hi : 0.0;
    };

    bool finite = true, dominating = true;
    for (const SweepReport& r : reports) {
        finite = finite && std::isfinite(r.max_box_sup.max_A) &&
                 std::isfinite(r.max_box_sup.max_B_ref) &&
                 std::isfinite(r.max_box_sup.max_B_dist) &&
                 std::isfinite(r.max_observed.max_A) &&
                 std::isfinite(r.max_observed.max_B_ref) &&
                 std::isfinite(r.max_observed.max_B_dist);
        dominating = dominating &&
                     r.max_observed.max_A <= r.max_box_sup.max_A + 1e-9 &&
                     r.max_observed.max_B_ref <=
                         r.max_box_sup.max_B_ref + 1e-9 &&
                     r.max_observed.max_B_dist <=
                         r.max_box_sup.max_B_dist + 1e-9;
    }
    const double worst_spread = std::max(
        {spread(reports[0].max_box_sup.max_A, reports[1].max_box_sup.max_A,
                reports[2].max_box_sup.max_A),
         spread(reports[0].max_box_sup.max_B_ref,
                reports[1].max_box_sup.max_B_ref,
                reports[2].max_box_sup.max_B_ref),
         spread(reports[0].max_box_sup.max_B_dist,
                reports[1].max_box_sup.max_B_dist,
                reports[2].max_box_sup.max_B_dist)});
    const bool deterministic =
        rerun.max_box_sup.max_A == reports[0].max_box_sup.max_A &&
        rerun.max_observed.max_A == reports[0].max_observed.max_A &&
        rerun.max_observed.max_B_ref == reports[0].max_observed.max_B_ref &&
        rerun.max_observed.max_B_dist == reports[0].max_observed.max_B_dist &&
        rerun.total_violations == reports[0].total_violations;

    const bool ok =
        finite && dominating && deterministic && worst_spread < kSpreadTol;
    return {"norm-bound-determinism", ok,
            fmt("certified norm bounds %.4f / %.4f / %.4f, cross-seed spread "
                "%.2g%% (tol 1%%), same-seed rerun identical: %s, observed "
                "<= certified: %s",
                reports[0].max_box_sup.max_A, reports[0].max_box_sup.max_B_ref,
                reports[0].max_box_sup.max_B_dist, 100.0 * worst_spread,
                deterministic ? "yes" : "no", dominating ? "yes" : "no")};
}

}  // namespace

int main() {
    const std::vector<Criterion> results{
        predictor_form_equivalence(), estimator_inequality_suite(),
        update_energy_budget(),       closed_loop_spectrum(),
        model_identity_suite(),       exponential_stability_sweep(),
        l2_tracking_convergence(),    bundled_demo_reproduction(),
        norm_bound_determinism(),
    };

    int failed = 0;
    for (const Criterion& c : results) {
        if (!c.ok) ++failed;
        std::printf("%-4s %-30s %s\n", c.ok ? "PASS" : "FAIL", c.name.c_str(),
                    c.detail.c_str());
    }
    std::printf("%zu/%zu criteria passed\n", results.size() - failed,
                results.size());
    return failed == 0 ? 0 : 1;
}
