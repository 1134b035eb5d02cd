// SPDX-License-Identifier: MIT
//
// Experiment configuration: one JSON document describing everything a
// closed-loop run depends on (plant schedule, admissible box, estimator
// settings, exogenous signals, initial condition, start time, horizon,
// seed).  Load/save round-trips losslessly so a config file is a complete,
// diff-able record of an experiment.

#ifndef DSTEP_CONFIG_HPP
#define DSTEP_CONFIG_HPP

#include <cstdint>
#include <string>

#include <json.hpp>

#include "dstep/estimator.hpp"
#include "dstep/plant.hpp"
#include "dstep/signals.hpp"

namespace dstep {

/** Everything one closed-loop experiment depends on. */
struct ExperimentConfig {
    std::int64_t t0 = 0;
    std::int64_t horizon = 0;  ///< number of rows, t = t0 .. t0 + horizon - 1
    std::uint64_t seed = 0;    ///< master seed for randomized drivers

    PlantSchedule plant;  ///< includes the delay d
    ParameterBox box;     ///< admissible predictor-parameter set

    double delta = std::numeric_limits<double>::infinity();
    Eigen::VectorXd theta0;      ///< initial estimate (must lie in the box)
    double min_phi_norm = 0.0;   ///< numerical floor, default off

    SignalSpec reference;
    SignalSpec disturbance;
    InitialCondition x0;

    /** Assembles the estimator configuration (box shared with `box`). */
    EstimatorConfig estimator() const;

    /**
     * Cross-field validation: schedule/box/estimate dimensions agree, the
     * initial condition has the right lengths, theta0 lies inside the box,
     * and a sample-based reference covers the preview window
     * [t0, t0 + horizon - 1 + d].
     * @throws std::invalid_argument
     */
    void validate() const;
};

// JSON (de)serialization.  Loaders throw std::invalid_argument on malformed
// documents; savers emit a normal form with every field explicit so that
// load(save(c)) == c and save(load(j)) is canonical.
nlohmann::json signal_to_json(const SignalSpec& s);
SignalSpec signal_from_json(const nlohmann::json& j);
nlohmann::json schedule_to_json(const PlantSchedule& schedule);
PlantSchedule schedule_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);

// Plant-family (coefficient box) documents consumed by the sweep and
// bound-fit drivers: {"d": int, "a_lower": [...], "a_upper": [...],
// "b_lower": [...], "b_upper": [...]}.
nlohmann::json family_to_json(const PlantCoefficientBox& family);
PlantCoefficientBox family_from_json(const nlohmann::json& j);

/** Parses and validates a plant-family file. @throws std::invalid_argument */
PlantCoefficientBox load_family_file(const std::string& path);

/** Parses and validates a config file. @throws std::invalid_argument */
ExperimentConfig load_config_file(const std::string& path);

/** Writes the canonical JSON form (2-space indent, trailing newline). */
void save_config_file(const ExperimentConfig& config, const std::string& path);

}  // namespace dstep

#endif  // DSTEP_CONFIG_HPP
