// SPDX-License-Identifier: MIT
//
// Experiment drivers: the bundled time-varying demo, random plant/box
// sampling for randomized suites, trace verification against a config, and
// the multi-plant stability sweep (decay-rate fits, convolution-bound
// validation, and crude-model norm bounds).

#ifndef DSTEP_EXPERIMENTS_HPP
#define DSTEP_EXPERIMENTS_HPP

#include <random>
#include <string>
#include <vector>

#include "dstep/analysis.hpp"
#include "dstep/config.hpp"
#include "dstep/controller.hpp"

namespace dstep {

// ---------------------------------------------------------------------------
// Bundled demo (second-order time-varying plant, delay 1)
// ---------------------------------------------------------------------------

/** Coefficient intervals of the demo family:
 *  a1, a2 in [-2, 2], b0 in [1.5, 5], b1 in [-1, 1], d = 1. */
PlantCoefficientBox demo_coefficient_box();

/** Predictor-space box of the demo family ([-2,2]^2 x [1.5,5] x [-1,1]). */
ParameterBox demo_predictor_box();

/** The demo family's published center plant: a = (0, 0), b = (3.25, -1). */
PlantParameters demo_midpoint_plant();

/** The demo's sinusoidally scheduled coefficients. */
PlantSchedule demo_timevarying_schedule();

/** The full bundled demo: time-varying plant, cosine reference, windowed
 *  disturbance, published initial data, midpoint initial estimate. */
ExperimentConfig demo_experiment();

/** Windowed tracking-error summary of a demo-shaped trace. */
struct DemoSummary {
    double rms_early = 0.0;  ///< RMS eps over rows [100, 200]
    double rms_mid = 0.0;    ///< RMS eps over rows [201, 500]
    double rms_late = 0.0;   ///< RMS eps over rows [600, 900]
    bool estimates_in_box = false;

    /** Tracking degrades while the disturbance is active and recovers. */
    bool ordering_ok() const {
        return rms_early < rms_mid && rms_late < rms_mid;
    }
};
DemoSummary summarize_demo(const SimulationTrace& trace,
                           const ParameterBox& S);

// ---------------------------------------------------------------------------
// Random sampling
// ---------------------------------------------------------------------------

/** How to sample a random plant with all input-polynomial zeros inside the
 *  unit disk (the decay-rate assumption) and sign-definite leading gain. */
struct PlantSampleOptions {
    int n = 2;
    int m = 1;
    int d = 1;
    double max_b_zero = 0.8;  ///< cap on input-zero moduli
    double b0_min = 0.8;      ///< leading-gain interval (positive)
    double b0_max = 3.0;
    bool stable_a = false;    ///< sample output-polynomial roots inside...
    double max_a_root = 0.85; ///< ...this radius; 1.05 cap when unstable ok
};

/** Draws a plant by sampling polynomial roots (real or conjugate pairs). */
PlantParameters sample_minimum_phase_plant(std::mt19937_64& rng,
                                           const PlantSampleOptions& options);

/** Uniform coefficient draw from a family box (delay copied from it). */
PlantParameters sample_plant_from_family(std::mt19937_64& rng,
                                         const PlantCoefficientBox& family);

/** Random axis-aligned box containing theta_star with per-coordinate
 *  margins in [0.3, 1.5]; the gain interval is kept sign-definite. */
ParameterBox box_around(const Eigen::VectorXd& theta_star,
                        Eigen::Index gain_index, std::mt19937_64& rng);

/** Uniform draw from a box. */
Eigen::VectorXd random_point_in_box(std::mt19937_64& rng,
                                    const ParameterBox& S);

/** Random initial history scaled to the requested Euclidean norm. */
InitialCondition random_initial_condition(std::mt19937_64& rng, int n, int m,
                                          int d, double norm);

// ---------------------------------------------------------------------------
// Running and verifying
// ---------------------------------------------------------------------------

/** Convenience constructor for a time-invariant experiment. */
ExperimentConfig make_plant_config(const PlantParameters& plant,
                                   const ParameterBox& box,
                                   const Eigen::VectorXd& theta0, double delta,
                                   const SignalSpec& reference,
                                   const SignalSpec& disturbance,
                                   const InitialCondition& x0, std::int64_t t0,
                                   std::int64_t horizon);

/** Validates the config and runs the closed loop. */
SimulationTrace run_experiment(const ExperimentConfig& config);

/** Attaches CSV rows to the run context carried by a config.
 *  @throws std::invalid_argument on width or contiguity errors */
SimulationTrace trace_from_table(const ExperimentConfig& config,
                                 TraceTable table);

/** One named verification outcome. */
struct CheckResult {
    enum class Status { kPass, kFail, kSkip };
    std::string name;
    Status status = Status::kPass;
    std::string detail;
};

struct VerificationReport {
    std::vector<CheckResult> checks;
    /** True when no check failed (skips allowed). */
    bool all_pass() const;
};

/**
 * Re-derives every column of a trace from the config and checks the full
 * invariant suite against it: estimator step/energy bounds, gate and box
 * invariants, prediction/tracking-error identities, both per-step regressor
 * models, and the gated decomposition with its structural inequalities.
 * Checks that need the true parameter or a fixed plant are skipped (with
 * notice) for time-varying schedules, as are lookahead checks on traces too
 * short to support them.
 */
VerificationReport verify_trace(const ExperimentConfig& config,
                                const SimulationTrace& trace);

// ---------------------------------------------------------------------------
// Multi-plant stability sweep
// ---------------------------------------------------------------------------

/**
 * Exact supremum of the estimate-driven model norms over all estimates in
 * the box (for a fixed plant).  The squared norms are convex in the
 * non-gain coordinates and decreasing in |beta_0|, so the supremum is
 * attained at a box corner; corners are enumerated (dim <= 16).
 */
EstimateDrivenNorms estimate_driven_box_sup(const PlantParameters& p,
                                            const ParameterBox& S);

struct StudyOptions {
    int n_plants = 50;
    int fit_runs = 40;      ///< runs used to fit the envelope
    int holdout_runs = 20;  ///< fresh runs checked against the fit
    std::int64_t horizon = 300;
    std::uint64_t seed = 0;
    double margin = 2.0;         ///< slack applied to the fitted constant
    bool include_corners = true; ///< coefficient-box corners before draws
};

/** Per-plant results of the sweep. */
struct PlantStudy {
    PlantParameters plant;
    bool excluded = false;      ///< failed the decay-rate assumption
    double zero_modulus = 0.0;  ///< largest input-zero modulus
    BoundFit fit;               ///< envelope fit over the fit runs
    int violations = 0;         ///< held-out pointwise violations
    EstimateDrivenNorms box_sup;   ///< exact sup over the estimate box
    EstimateDrivenNorms observed;  ///< max along simulated trajectories
};

struct SweepReport {
    std::vector<PlantStudy> plants;
    double lambda_under = 0.0;   ///< max zero modulus over included plants
    double max_lambda_hat = 0.0;
    double max_c = 0.0;
    EstimateDrivenNorms max_box_sup;
    EstimateDrivenNorms max_observed;
    int total_violations = 0;
    int excluded = 0;

    /** Every included plant got a feasible fit with rate below one. */
    bool all_fits_stable() const;
};

/**
 * Samples plants from the family (every coefficient-box corner first, then
 * uniform draws), excludes any that violate the decay-rate assumption, and
 * for each runs seeded zero-input closed loops from random unit initial
 * conditions: fits the decaying convolution envelope on the fit runs,
 * counts pointwise violations on held-out runs (with margin), and records
 * the crude-model norm bounds (exact box supremum and observed maxima).
 */
SweepReport run_stability_sweep(const PlantCoefficientBox& family,
                                const StudyOptions& options);

}  // namespace dstep

#endif  // DSTEP_EXPERIMENTS_HPP
