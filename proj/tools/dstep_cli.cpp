// SPDX-License-Identifier: MIT
//
// Command-line driver: run closed-loop experiments from JSON configs,
// verify traces against the invariant suite, reproduce the bundled
// time-varying demo, and run the multi-plant stability/bound studies.
//
// Exit codes: 0 = pass, 1 = invariant failure, 2 = usage/config error.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <limits>
#include <string>

#include <CLI11.hpp>

#include "dstep/config.hpp"
#include "dstep/experiments.hpp"
#include "dstep/trace.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitInvariantFailure = 1;
constexpr int kExitUsage = 2;

struct StudyFlags {
    int plants = 50;
    std::uint64_t seed = 0;
    std::int64_t horizon = 300;
    int fit_runs = 40;
    int holdout_runs = 20;
    double margin = 2.0;
    bool random_plants_only = false;
    std::string family_path;
    std::string out_path;
};

void add_study_flags(CLI::App* cmd, StudyFlags& flags) {
    cmd->add_option("--plants", flags.plants, "plants to sample")
        ->capture_default_str();
    cmd->add_option("--seed", flags.seed, "master seed")
        ->capture_default_str();
    cmd->add_option("--horizon", flags.horizon, "steps per run")
        ->capture_default_str();
    cmd->add_option("--fit-runs", flags.fit_runs,
                    "runs per plant used to fit the envelope")
        ->capture_default_str();
    cmd->add_option("--holdout-runs", flags.holdout_runs,
                    "fresh runs checked against the fit")
        ->capture_default_str();
    cmd->add_option("--margin", flags.margin,
                    "slack applied to the fitted constant on held-out runs")
        ->capture_default_str();
    cmd->add_flag("--random-plants-only", flags.random_plants_only,
                  "sample every plant instead of seeding the corner set");
    cmd->add_option("--family", flags.family_path,
                    "coefficient-box JSON (default: the bundled demo family)");
    cmd->add_option("--out", flags.out_path, "write the JSON report here");
}

dstep::PlantCoefficientBox family_for(const StudyFlags& flags) {
    if (!flags.family_path.empty()) {
        return dstep::load_family_file(flags.family_path);
    }
    return dstep::demo_coefficient_box();
}

nlohmann::json norms_to_json(const dstep::EstimateDrivenNorms& norms) {
    return nlohmann::json{{"max_A", norms.max_A},
                          {"max_B_ref", norms.max_B_ref},
                          {"max_B_dist", norms.max_B_dist}};
}

nlohmann::json study_report_json(const dstep::SweepReport& report) {
    nlohmann::json plants = nlohmann::json::array();
    for (const dstep::PlantStudy& study : report.plants) {
        nlohmann::json entry{{"a", study.plant.a},
                             {"b", study.plant.b},
                             {"excluded", study.excluded},
                             {"zero_modulus", study.zero_modulus}};
        if (!study.excluded) {
            entry["fit"] = {{"feasible", study.fit.feasible},
                            {"lambda", study.fit.lambda},
                            {"c", study.fit.c}};
            entry["violations"] = study.violations;
            entry["norm_sup"] = norms_to_json(study.box_sup);
            entry["norm_observed"] = norms_to_json(study.observed);
        }
        plants.push_back(std::move(entry));
    }
    return nlohmann::json{{"plants", std::move(plants)},
                          {"lambda_under", report.lambda_under},
                          {"max_lambda_hat", report.max_lambda_hat},
                          {"max_c", report.max_c},
                          {"max_norm_sup", norms_to_json(report.max_box_sup)},
                          {"max_norm_observed",
                           norms_to_json(report.max_observed)},
                          {"total_violations", report.total_violations},
                          {"excluded", report.excluded}};
}

void write_json_file(const nlohmann::json& j, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::invalid_argument("cannot write '" + path + "'");
    const std::string text = j.dump(2) + "\n";
    std::fwrite(text.data(), 1, text.size(), f);
    std::fclose(f);
}

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 const std::uint64_t* seed, const std::int64_t* horizon) {
    dstep::ExperimentConfig config = dstep::load_config_file(config_path);
    if (seed) config.seed = *seed;
    if (horizon) config.horizon = *horizon;
    config.validate();
    const dstep::SimulationTrace trace = dstep::run_experiment(config);
    dstep::write_trace_csv_file(out_path, trace);
    std::printf("wrote %zu rows to %s\n", trace.rows.size(),
                out_path.c_str());
    return kExitPass;
}

int cmd_verify(const std::string& config_path, const std::string& trace_path) {
    const dstep::ExperimentConfig config =
        dstep::load_config_file(config_path);
    dstep::TraceTable table;
    try {
        table = dstep::read_trace_csv_file(trace_path);
    } catch (const std::runtime_error& e) {
        // An unreadable trace path is a usage error, not a failed invariant.
        throw std::invalid_argument(e.what());
    }
    const dstep::SimulationTrace trace =
        dstep::trace_from_table(config, std::move(table));
    const dstep::VerificationReport report =
        dstep::verify_trace(config, trace);
    for (const dstep::CheckResult& check : report.checks) {
        const char* tag = "PASS";
        if (check.status == dstep::CheckResult::Status::kFail) tag = "FAIL";
        if (check.status == dstep::CheckResult::Status::kSkip) tag = "SKIP";
        std::printf("%-4s %-26s %s\n", tag, check.name.c_str(),
                    check.detail.c_str());
    }
    if (!report.all_pass()) {
        std::printf("verification FAILED\n");
        return kExitInvariantFailure;
    }
    std::printf("all checks passed\n");
    return kExitPass;
}

int cmd_repro_example(const std::string& out_dir) {
    namespace fs = std::filesystem;
    const dstep::ExperimentConfig config = dstep::demo_experiment();
    const dstep::SimulationTrace trace = dstep::run_experiment(config);

    fs::create_directories(out_dir);
    const std::string trace_path = (fs::path(out_dir) / "demo-trace.csv")
                                       .string();
    const std::string config_path = (fs::path(out_dir) / "demo-config.json")
                                        .string();
    dstep::write_trace_csv_file(trace_path, trace);
    dstep::save_config_file(config, config_path);

    const dstep::DemoSummary summary =
        dstep::summarize_demo(trace, config.box);
    std::printf("wrote %s and %s\n", trace_path.c_str(), config_path.c_str());
    std::printf("rms tracking error, rows [100,200]: %.6f\n",
                summary.rms_early);
    std::printf("rms tracking error, rows [201,500]: %.6f  (disturbance on)\n",
                summary.rms_mid);
    std::printf("rms tracking error, rows [600,900]: %.6f\n",
                summary.rms_late);
    std::printf("estimates inside the box: %s\n",
                summary.estimates_in_box ? "yes" : "NO");
    std::printf("degrade-then-recover ordering: %s\n",
                summary.ordering_ok() ? "yes" : "NO");
    return (summary.ordering_ok() && summary.estimates_in_box)
               ? kExitPass
               : kExitInvariantFailure;
}

int cmd_study(const StudyFlags& flags, bool norms_view) {
    dstep::StudyOptions options;
    options.n_plants = flags.plants;
    options.seed = flags.seed;
    options.horizon = flags.horizon;
    options.fit_runs = flags.fit_runs;
    options.holdout_runs = flags.holdout_runs;
    options.margin = flags.margin;
    options.include_corners = !flags.random_plants_only;

    const dstep::SweepReport report =
        dstep::run_stability_sweep(family_for(flags), options);

    for (std::size_t i = 0; i < report.plants.size(); ++i) {
        const dstep::PlantStudy& study = report.plants[i];
        if (study.excluded) {
            std::printf("plant %2zu: EXCLUDED (input zero modulus %.4f)\n", i,
                        study.zero_modulus);
            continue;
        }
        if (norms_view) {
            std::printf(
                "plant %2zu: zero %.4f  lambda %.4f  c %-10.4g "
                "sup ||A_b|| %.4f  ||B_ref|| %.4f  ||B_dist|| %.4f\n",
                i, study.zero_modulus, study.fit.lambda, study.fit.c,
                study.box_sup.max_A, study.box_sup.max_B_ref,
                study.box_sup.max_B_dist);
        } else {
            std::printf(
                "plant %2zu: zero %.4f  lambda %.4f  c %-10.4g "
                "holdout violations %d\n",
                i, study.zero_modulus, study.fit.lambda, study.fit.c,
                study.violations);
        }
    }
    std::printf("decay-rate floor (max input-zero modulus): %.4f\n",
                report.lambda_under);
    std::printf("max fitted lambda: %.4f   max fitted c: %.4g\n",
                report.max_lambda_hat, report.max_c);
    std::printf("norm bounds: ||A_b|| %.6f  ||B_ref|| %.6f  ||B_dist|| %.6f "
                "(observed %.6f / %.6f / %.6f)\n",
                report.max_box_sup.max_A, report.max_box_sup.max_B_ref,
                report.max_box_sup.max_B_dist, report.max_observed.max_A,
                report.max_observed.max_B_ref,
                report.max_observed.max_B_dist);
    std::printf("held-out violations: %d   excluded plants: %d\n",
                report.total_violations, report.excluded);

    if (!flags.out_path.empty()) {
        write_json_file(study_report_json(report), flags.out_path);
        std::printf("wrote %s\n", flags.out_path.c_str());
    }
    const bool ok =
        report.all_fits_stable() && report.total_violations == 0;
    std::printf("%s\n", ok ? "study PASSED" : "study FAILED");
    return ok ? kExitPass : kExitInvariantFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Adaptive tracking-control testbench: d-step-ahead certainty-"
        "equivalence control with a gated projection estimator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string trace_path;
    std::string out_path = "trace.csv";
    std::string out_dir = ".";
    std::uint64_t seed_override = 0;
    std::int64_t horizon_override = 0;

    CLI::App* simulate =
        app.add_subcommand("simulate", "run one closed-loop experiment");
    simulate->add_option("--config", config_path, "experiment JSON")
        ->required();
    simulate->add_option("--out", out_path, "trace CSV to write")
        ->capture_default_str();
    CLI::Option* seed_opt =
        simulate->add_option("--seed", seed_override, "override config seed");
    CLI::Option* horizon_opt = simulate->add_option(
        "--horizon", horizon_override, "override config horizon");

    CLI::App* verify =
        app.add_subcommand("verify", "check a trace against the invariants");
    verify->add_option("--config", config_path, "experiment JSON")->required();
    verify->add_option("--trace", trace_path, "trace CSV to verify")
        ->required();

    CLI::App* repro = app.add_subcommand(
        "repro-example", "run the bundled time-varying demo");
    repro->add_option("--out-dir", out_dir, "directory for demo outputs")
        ->capture_default_str();

    StudyFlags sweep_flags;
    CLI::App* sweep = app.add_subcommand(
        "sweep", "multi-plant stability and norm-bound sweep");
    add_study_flags(sweep, sweep_flags);

    StudyFlags fit_flags;
    CLI::App* fit = app.add_subcommand(
        "fit-bound", "fit decaying envelopes and validate on held-out runs");
    add_study_flags(fit, fit_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (simulate->parsed()) {
            const std::uint64_t seed = seed_override;
            const std::int64_t horizon = horizon_override;
            return cmd_simulate(config_path, out_path,
                                seed_opt->count() ? &seed : nullptr,
                                horizon_opt->count() ? &horizon : nullptr);
        }
        if (verify->parsed()) {
            return cmd_verify(config_path, trace_path);
        }
        if (repro->parsed()) {
            return cmd_repro_example(out_dir);
        }
        if (sweep->parsed()) {
            return cmd_study(sweep_flags, /*norms_view=*/true);
        }
        if (fit->parsed()) {
            return cmd_study(fit_flags, /*norms_view=*/false);
        }
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInvariantFailure;
    }
    return kExitUsage;
}
