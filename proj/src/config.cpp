// SPDX-License-Identifier: MIT

#include "dstep/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace dstep {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) {
    throw std::invalid_argument("config: " + what);
}

const json& require(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end()) fail(std::string("missing field '") + key + "'");
    return *it;
}

std::vector<double> to_doubles(const json& j, const char* key) {
    if (!j.is_array()) fail(std::string("'") + key + "' must be an array");
    std::vector<double> out;
    out.reserve(j.size());
    for (const json& v : j) {
        if (!v.is_number()) {
            fail(std::string("'") + key + "' must contain only numbers");
        }
        out.push_back(v.get<double>());
    }
    return out;
}

Eigen::VectorXd to_vector(const json& j, const char* key) {
    const std::vector<double> values = to_doubles(j, key);
    return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                             static_cast<Eigen::Index>(
                                                 values.size()));
}

json from_vector(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

json coefficient_to_json(const CoefficientSpec& c) {
    return json{{"offset", c.offset},
                {"amplitude", c.amplitude},
                {"frequency", c.frequency},
                {"phase", c.phase},
                {"time_shift", c.time_shift},
                {"waveform",
                 c.waveform == CoefficientSpec::Waveform::kSin ? "sin"
                                                               : "cos"}};
}

CoefficientSpec coefficient_from_json(const json& j) {
    if (!j.is_object()) fail("coefficient spec must be an object");
    CoefficientSpec c;
    c.offset = j.value("offset", 0.0);
    c.amplitude = j.value("amplitude", 0.0);
    c.frequency = j.value("frequency", 0.0);
    c.phase = j.value("phase", 0.0);
    c.time_shift = j.value("time_shift", 0.0);
    const std::string waveform = j.value("waveform", "cos");
    if (waveform == "cos") {
        c.waveform = CoefficientSpec::Waveform::kCos;
    } else if (waveform == "sin") {
        c.waveform = CoefficientSpec::Waveform::kSin;
    } else {
        fail("waveform must be 'cos' or 'sin'");
    }
    return c;
}

json delta_to_json(double delta) {
    if (std::isinf(delta)) return json("inf");
    return json(delta);
}

double delta_from_json(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") {
            return std::numeric_limits<double>::infinity();
        }
        fail("estimator.delta must be a positive number or \"inf\"");
    }
    if (!j.is_number()) {
        fail("estimator.delta must be a positive number or \"inf\"");
    }
    return j.get<double>();
}

}  // namespace

// ---------------------------------------------------------------------------
// Signals
// ---------------------------------------------------------------------------

nlohmann::json signal_to_json(const SignalSpec& s) {
    switch (s.kind) {
        case SignalSpec::Kind::kZero:
            return json{{"kind", "zero"}};
        case SignalSpec::Kind::kConstant:
            return json{{"kind", "constant"}, {"value", s.value}};
        case SignalSpec::Kind::kCosine:
            return json{{"kind", "cosine"},
                        {"amplitude", s.amplitude},
                        {"frequency", s.frequency},
                        {"phase", s.phase},
                        {"time_shift", s.time_shift}};
        case SignalSpec::Kind::kWindowedCosine:
            return json{{"kind", "windowed_cosine"},
                        {"amplitude", s.amplitude},
                        {"frequency", s.frequency},
                        {"phase", s.phase},
                        {"time_shift", s.time_shift},
                        {"window_start", s.window_start},
                        {"window_end", s.window_end}};
        case SignalSpec::Kind::kSamples: {
            json samples = json::array();
            for (double v : s.samples) samples.push_back(v);
            return json{{"kind", "samples"},
                        {"samples_start", s.samples_start},
                        {"samples", std::move(samples)}};
        }
    }
    fail("unknown signal kind");
}

SignalSpec signal_from_json(const nlohmann::json& j) {
    if (!j.is_object()) fail("signal spec must be an object");
    const std::string kind = require(j, "kind").get<std::string>();
    SignalSpec s;
    if (kind == "zero") {
        s = SignalSpec::zero();
    } else if (kind == "constant") {
        s = SignalSpec::constant(require(j, "value").get<double>());
    } else if (kind == "cosine") {
        s = SignalSpec::cosine(require(j, "amplitude").get<double>(),
                               require(j, "frequency").get<double>(),
                               j.value("phase", 0.0),
                               j.value("time_shift", 0.0));
    } else if (kind == "windowed_cosine") {
        s = SignalSpec::windowed_cosine(
            require(j, "amplitude").get<double>(),
            require(j, "frequency").get<double>(),
            require(j, "window_start").get<std::int64_t>(),
            require(j, "window_end").get<std::int64_t>(),
            j.value("phase", 0.0), j.value("time_shift", 0.0));
    } else if (kind == "samples") {
        s = SignalSpec::from_samples(
            require(j, "samples_start").get<std::int64_t>(),
            to_doubles(require(j, "samples"), "samples"));
    } else {
        fail("unknown signal kind '" + kind + "'");
    }
    s.validate();
    return s;
}

// ---------------------------------------------------------------------------
// Plant schedule
// ---------------------------------------------------------------------------

nlohmann::json schedule_to_json(const PlantSchedule& schedule) {
    json out;
    out["d"] = schedule.d;
    switch (schedule.kind) {
        case PlantSchedule::Kind::kConstant: {
            out["kind"] = "constant";
            out["a"] = json(schedule.a_const);
            out["b"] = json(schedule.b_const);
            break;
        }
        case PlantSchedule::Kind::kSinusoidal: {
            out["kind"] = "sinusoidal";
            json a = json::array();
            for (const CoefficientSpec& c : schedule.a_spec) {
                a.push_back(coefficient_to_json(c));
            }
            json b = json::array();
            for (const CoefficientSpec& c : schedule.b_spec) {
                b.push_back(coefficient_to_json(c));
            }
            out["a"] = std::move(a);
            out["b"] = std::move(b);
            break;
        }
        case PlantSchedule::Kind::kTabulated: {
            out["kind"] = "tabulated";
            out["table_start"] = schedule.table_start;
            out["a_rows"] = json(schedule.a_rows);
            out["b_rows"] = json(schedule.b_rows);
            break;
        }
    }
    return out;
}

PlantSchedule schedule_from_json(const nlohmann::json& j) {
    if (!j.is_object()) fail("plant spec must be an object");
    PlantSchedule s;
    s.d = require(j, "d").get<int>();
    const std::string kind = require(j, "kind").get<std::string>();
    if (kind == "constant") {
        s.kind = PlantSchedule::Kind::kConstant;
        s.a_const = to_doubles(require(j, "a"), "a");
        s.b_const = to_doubles(require(j, "b"), "b");
    } else if (kind == "sinusoidal") {
        s.kind = PlantSchedule::Kind::kSinusoidal;
        for (const json& c : require(j, "a")) {
            s.a_spec.push_back(coefficient_from_json(c));
        }
        for (const json& c : require(j, "b")) {
            s.b_spec.push_back(coefficient_from_json(c));
        }
    } else if (kind == "tabulated") {
        s.kind = PlantSchedule::Kind::kTabulated;
        s.table_start = require(j, "table_start").get<std::int64_t>();
        for (const json& row : require(j, "a_rows")) {
            s.a_rows.push_back(to_doubles(row, "a_rows"));
        }
        for (const json& row : require(j, "b_rows")) {
            s.b_rows.push_back(to_doubles(row, "b_rows"));
        }
    } else {
        fail("unknown plant kind '" + kind + "'");
    }
    s.validate();
    return s;
}

// ---------------------------------------------------------------------------
// Experiment config
// ---------------------------------------------------------------------------

EstimatorConfig ExperimentConfig::estimator() const {
    EstimatorConfig cfg;
    cfg.delta = delta;
    cfg.S = box;
    cfg.theta0 = theta0;
    cfg.min_phi_norm = min_phi_norm;
    return cfg;
}

void ExperimentConfig::validate() const {
    if (horizon < 0) fail("horizon must be nonnegative");
    plant.validate();
    box.validate();
    const int dim = plant.dim();
    if (box.dim() != dim) {
        fail("box dimension " + std::to_string(box.dim()) +
             " does not match the plant's parameter dimension " +
             std::to_string(dim));
    }
    if (box.gain_index != plant.n()) {
        fail("box gain index must equal the output order n");
    }
    if (theta0.size() != dim) {
        fail("theta0 length does not match the parameter dimension");
    }
    if (!theta0.allFinite()) fail("theta0 must be finite");
    if ((theta0.array() < box.lower.array()).any() ||
        (theta0.array() > box.upper.array()).any()) {
        fail("theta0 must lie inside the box");
    }
    if (!(delta > 0.0)) fail("estimator.delta must be positive");
    if (!(min_phi_norm >= 0.0) || !std::isfinite(min_phi_norm)) {
        fail("estimator.min_phi_norm must be finite and nonnegative");
    }
    reference.validate();
    disturbance.validate();
    x0.validate(plant.n(), plant.m(), plant.d);

    // The controller previews the reference d steps ahead, so a sample-based
    // reference must actually cover the preview window.
    if (reference.kind == SignalSpec::Kind::kSamples && horizon > 0) {
        const std::int64_t need_lo = t0;
        const std::int64_t need_hi = t0 + horizon - 1 + plant.d;
        const std::int64_t have_lo = reference.samples_start;
        const std::int64_t have_hi =
            reference.samples_start +
            static_cast<std::int64_t>(reference.samples.size()) - 1;
        if (have_lo > need_lo || have_hi < need_hi) {
            fail("sample-based reference must cover [t0, t0+horizon-1+d]");
        }
    }
}

nlohmann::json config_to_json(const ExperimentConfig& config) {
    json out;
    out["t0"] = config.t0;
    out["horizon"] = config.horizon;
    out["seed"] = config.seed;
    out["plant"] = schedule_to_json(config.plant);
    out["box"] = json{{"lower", from_vector(config.box.lower)},
                      {"upper", from_vector(config.box.upper)}};
    out["estimator"] = json{{"delta", delta_to_json(config.delta)},
                            {"theta0", from_vector(config.theta0)},
                            {"min_phi_norm", config.min_phi_norm}};
    out["reference"] = signal_to_json(config.reference);
    out["disturbance"] = signal_to_json(config.disturbance);
    out["x0"] = json{{"y", json(config.x0.y_hist)},
                     {"u", json(config.x0.u_hist)}};
    return out;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) fail("document root must be an object");
    ExperimentConfig c;
    c.t0 = require(j, "t0").get<std::int64_t>();
    c.horizon = require(j, "horizon").get<std::int64_t>();
    c.seed = j.value("seed", std::uint64_t{0});
    c.plant = schedule_from_json(require(j, "plant"));

    const json& box = require(j, "box");
    c.box.lower = to_vector(require(box, "lower"), "box.lower");
    c.box.upper = to_vector(require(box, "upper"), "box.upper");
    c.box.gain_index = c.plant.n();

    const json& est = require(j, "estimator");
    c.delta = delta_from_json(require(est, "delta"));
    c.theta0 = to_vector(require(est, "theta0"), "estimator.theta0");
    c.min_phi_norm = est.value("min_phi_norm", 0.0);

    c.reference = signal_from_json(require(j, "reference"));
    c.disturbance = signal_from_json(require(j, "disturbance"));

    const json& x0 = require(j, "x0");
    c.x0.y_hist = to_doubles(require(x0, "y"), "x0.y");
    c.x0.u_hist = to_doubles(require(x0, "u"), "x0.u");

    c.validate();
    return c;
}

nlohmann::json family_to_json(const PlantCoefficientBox& family) {
    return json{{"d", family.d},
                {"a_lower", json(family.a_lower)},
                {"a_upper", json(family.a_upper)},
                {"b_lower", json(family.b_lower)},
                {"b_upper", json(family.b_upper)}};
}

PlantCoefficientBox family_from_json(const nlohmann::json& j) {
    if (!j.is_object()) fail("plant family must be an object");
    PlantCoefficientBox family;
    family.d = require(j, "d").get<int>();
    family.a_lower = to_doubles(require(j, "a_lower"), "a_lower");
    family.a_upper = to_doubles(require(j, "a_upper"), "a_upper");
    family.b_lower = to_doubles(require(j, "b_lower"), "b_lower");
    family.b_upper = to_doubles(require(j, "b_upper"), "b_upper");
    family.validate();
    return family;
}

PlantCoefficientBox load_family_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        fail("parse error in '" + path + "': " + e.what());
    }
    return family_from_json(j);
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        fail("parse error in '" + path + "': " + e.what());
    }
    return config_from_json(j);
}

void save_config_file(const ExperimentConfig& config,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out) fail("cannot write '" + path + "'");
    out << config_to_json(config).dump(2) << "\n";
}

}  // namespace dstep
