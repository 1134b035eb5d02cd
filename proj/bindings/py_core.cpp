// SPDX-License-Identifier: MIT
//
// Python bindings: a thin wrapper over the predictor-form algebra, the
// gated-projection estimator step, the closed-loop simulation engine, and
// the trace verifier.  Configs cross the boundary as JSON strings and
// traces as plain lists, so the Python side needs no extra dependencies.

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dstep/config.hpp"
#include "dstep/controller.hpp"
#include "dstep/estimator.hpp"
#include "dstep/experiments.hpp"
#include "dstep/plant.hpp"
#include "dstep/polynomial.hpp"
#include "dstep/trace.hpp"

namespace py = pybind11;

namespace {

using namespace dstep;

Eigen::VectorXd to_eigen(const std::vector<double>& values) {
    return Eigen::Map<const Eigen::VectorXd>(
        values.data(), static_cast<Eigen::Index>(values.size()));
}

std::vector<double> to_vector(const Eigen::VectorXd& values) {
    return {values.data(), values.data() + values.size()};
}

/** Parse failures surface as ValueError, matching config validation. */
ExperimentConfig config_from_string(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    return config_from_json(j);
}

py::dict predictor_form_py(int d, const std::vector<double>& a,
                           const std::vector<double>& b) {
    PlantParameters p;
    p.d = d;
    p.a = a;
    p.b = b;
    p.validate();
    const PredictorForm form = to_predictor(p);
    py::dict out;
    out["alpha"] = form.theta.alpha;
    out["beta"] = form.theta.beta;
    out["f"] = form.F.coeffs;
    return out;
}

std::vector<std::complex<double>> zeros_in_z_py(const std::vector<double>& b) {
    return zeros_in_z(Polynomial(b));
}

double box_norm_py(const std::vector<double>& lower,
                   const std::vector<double>& upper) {
    if (lower.size() != upper.size()) {
        throw std::invalid_argument("box: lower/upper length mismatch");
    }
    ParameterBox S;
    S.lower = to_eigen(lower);
    S.upper = to_eigen(upper);
    return box_norm(S);
}

py::dict estimator_step_py(const std::vector<double>& theta,
                           const std::vector<double>& phi, double y_next,
                           const std::vector<double>& lower,
                           const std::vector<double>& upper,
                           std::int64_t gain_index, double delta,
                           double min_phi_norm) {
    EstimatorConfig cfg;
    cfg.delta = delta;
    cfg.S.lower = to_eigen(lower);
    cfg.S.upper = to_eigen(upper);
    cfg.S.gain_index = static_cast<Eigen::Index>(gain_index);
    cfg.theta0 = to_eigen(theta);
    cfg.min_phi_norm = min_phi_norm;
    cfg.validate_and_project();
    if (static_cast<Eigen::Index>(phi.size()) != cfg.S.dim()) {
        throw std::invalid_argument("estimator_step: phi/box size mismatch");
    }
    const EstimatorStep step =
        estimator_update(to_eigen(theta), to_eigen(phi), y_next, cfg);
    py::dict out;
    out["e"] = step.e;
    out["rho"] = step.rho;
    out["nu"] = step.nu;
    out["theta_check"] = to_vector(step.theta_check);
    out["theta_hat"] = to_vector(step.theta_hat);
    return out;
}

py::dict trace_to_dict(const SimulationTrace& trace) {
    const std::size_t rows = trace.rows.size();
    std::vector<std::int64_t> t(rows);
    std::vector<double> y(rows), u(rows), ystar(rows), w(rows), wb(rows),
        e(rows), eps(rows), rho(rows), nu(rows), V(rows);
    std::vector<std::vector<double>> theta_hat(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        const TraceRecord& r = trace.rows[i];
        t[i] = r.t;
        y[i] = r.y;
        u[i] = r.u;
        ystar[i] = r.ystar;
        w[i] = r.w;
        wb[i] = r.wbar;
        e[i] = r.e;
        eps[i] = r.eps;
        rho[i] = r.rho;
        nu[i] = r.nu;
        V[i] = r.V;
        theta_hat[i] = to_vector(r.theta_hat);
    }
    py::dict out;
    out["t0"] = trace.t0;
    out["n"] = trace.n;
    out["m"] = trace.m;
    out["d"] = trace.d;
    out["t"] = t;
    out["y"] = y;
    out["u"] = u;
    out["ystar"] = ystar;
    out["w"] = w;
    out["wbar"] = wb;
    out["e"] = e;
    out["eps"] = eps;
    out["rho"] = rho;
    out["nu"] = nu;
    out["V"] = V;
    out["theta_hat"] = theta_hat;
    return out;
}

py::dict simulate_py(const std::string& config_json) {
    return trace_to_dict(run_experiment(config_from_string(config_json)));
}

std::size_t simulate_to_csv_py(const std::string& config_json,
                               const std::string& path) {
    const SimulationTrace trace =
        run_experiment(config_from_string(config_json));
    write_trace_csv_file(path, trace);
    return trace.rows.size();
}

py::list verify_py(const std::string& config_json,
                   const std::string& trace_path) {
    const ExperimentConfig config = config_from_string(config_json);
    const SimulationTrace trace =
        trace_from_table(config, read_trace_csv_file(trace_path));
    const VerificationReport report = verify_trace(config, trace);
    py::list out;
    for (const CheckResult& check : report.checks) {
        const char* status = "pass";
        if (check.status == CheckResult::Status::kFail) status = "fail";
        if (check.status == CheckResult::Status::kSkip) status = "skip";
        py::dict entry;
        entry["name"] = check.name;
        entry["status"] = status;
        entry["detail"] = check.detail;
        out.append(entry);
    }
    return out;
}

std::string demo_config_json_py() {
    return config_to_json(demo_experiment()).dump(2) + "\n";
}

py::dict run_demo_summary_py() {
    const ExperimentConfig config = demo_experiment();
    const SimulationTrace trace = run_experiment(config);
    const DemoSummary summary = summarize_demo(trace, config.box);
    py::dict out;
    out["rms_early"] = summary.rms_early;
    out["rms_mid"] = summary.rms_mid;
    out["rms_late"] = summary.rms_late;
    out["estimates_in_box"] = summary.estimates_in_box;
    out["ordering_ok"] = summary.ordering_ok();
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() =
        "Adaptive d-step-ahead tracking control: certainty-equivalence "
        "control with a gated projection estimator.";
    m.attr("__version__") = "0.1.0";

    m.def("predictor_form", &predictor_form_py, py::arg("d"), py::arg("a"),
          py::arg("b"),
          "Predictor-form parameters of a plant: dict with the output-history "
          "weights `alpha`, input weights `beta` (beta[0] = b[0]), and the "
          "length-d division quotient `f` that filters the disturbance.");
    m.def("zeros_in_z", &zeros_in_z_py, py::arg("b"),
          "Zeros of the input polynomial in the forward variable z.");
    m.def("box_norm", &box_norm_py, py::arg("lower"), py::arg("upper"),
          "Largest Euclidean norm attained inside an axis-aligned box.");
    m.def("estimator_step", &estimator_step_py, py::arg("theta"),
          py::arg("phi"), py::arg("y_next"), py::arg("lower"),
          py::arg("upper"), py::arg("gain_index"), py::arg("delta"),
          py::arg("min_phi_norm") = 0.0,
          "One gated-projection update; returns e, rho, nu, theta_check, "
          "theta_hat.");
    m.def("simulate", &simulate_py, py::arg("config_json"),
          "Run a closed-loop experiment from a JSON config string; returns "
          "the trace as a dict of columns.");
    m.def("simulate_to_csv", &simulate_to_csv_py, py::arg("config_json"),
          py::arg("path"),
          "Run a closed-loop experiment and write the trace CSV; returns the "
          "row count.");
    m.def("verify", &verify_py, py::arg("config_json"), py::arg("trace_path"),
          "Check a trace CSV against the invariant suite; returns a list of "
          "{name, status, detail} dicts with status pass/fail/skip.");
    m.def("demo_config_json", &demo_config_json_py,
          "The bundled time-varying demo configuration as a JSON string.");
    m.def("run_demo_summary", &run_demo_summary_py,
          "Run the bundled demo and summarize its tracking-error windows.");
}
