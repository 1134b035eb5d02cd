// SPDX-License-Identifier: MIT

#include "dstep/trace.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace dstep {

namespace {

const char* const kFixedColumns[] = {"t",   "y",   "u",   "ystar", "w", "wbar",
                                     "e",   "eps", "rho", "nu",    "V"};
constexpr int kNumFixedColumns = 11;

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

double parse_double(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) {
        throw std::invalid_argument("trace CSV: bad numeric field '" + s + "'");
    }
    return v;
}

}  // namespace

void SimulationTrace::validate() const {
    if (d < 1 || n < 0 || m < 0) {
        throw std::invalid_argument("SimulationTrace: bad plant orders");
    }
    x0.validate(n, m, d);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].t != t0 + static_cast<std::int64_t>(i)) {
            throw std::invalid_argument("SimulationTrace: rows not contiguous");
        }
        if (rows[i].theta_hat.size() != theta_dim()) {
            throw std::invalid_argument(
                "SimulationTrace: estimate width mismatch");
        }
    }
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_trace_csv(std::ostream& out, const SimulationTrace& trace) {
    for (int i = 0; i < kNumFixedColumns; ++i) {
        if (i) out << ',';
        out << kFixedColumns[i];
    }
    for (int i = 0; i < trace.theta_dim(); ++i) {
        out << ",thetahat_" << i;
    }
    out << '\n';
    for (const TraceRecord& r : trace.rows) {
        out << r.t << ',' << format_double(r.y) << ',' << format_double(r.u)
            << ',' << format_double(r.ystar) << ',' << format_double(r.w)
            << ',' << format_double(r.wbar) << ',' << format_double(r.e) << ','
            << format_double(r.eps) << ',' << format_double(r.rho) << ','
            << format_double(r.nu) << ',' << format_double(r.V);
        for (Eigen::Index i = 0; i < r.theta_hat.size(); ++i) {
            out << ',' << format_double(r.theta_hat(i));
        }
        out << '\n';
    }
}

void write_trace_csv_file(const std::string& path,
                          const SimulationTrace& trace) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open trace file for writing: " + path);
    }
    write_trace_csv(out, trace);
    out.flush();
    if (!out) {
        throw std::runtime_error("failed writing trace file: " + path);
    }
}

TraceTable read_trace_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw std::invalid_argument("trace CSV: missing header");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv_line(line);
    if (static_cast<int>(header.size()) < kNumFixedColumns) {
        throw std::invalid_argument("trace CSV: short header");
    }
    for (int i = 0; i < kNumFixedColumns; ++i) {
        if (header[static_cast<std::size_t>(i)] != kFixedColumns[i]) {
            throw std::invalid_argument("trace CSV: unexpected column '" +
                                        header[static_cast<std::size_t>(i)] +
                                        "'");
        }
    }
    TraceTable table;
    table.theta_dim = static_cast<int>(header.size()) - kNumFixedColumns;
    for (int i = 0; i < table.theta_dim; ++i) {
        const std::string expected = "thetahat_" + std::to_string(i);
        if (header[static_cast<std::size_t>(kNumFixedColumns + i)] != expected) {
            throw std::invalid_argument("trace CSV: unexpected column '" +
                                        header[static_cast<std::size_t>(
                                            kNumFixedColumns + i)] +
                                        "'");
        }
    }

    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw std::invalid_argument("trace CSV: row width mismatch");
        }
        TraceRecord r;
        r.t = static_cast<std::int64_t>(std::strtoll(fields[0].c_str(),
                                                     nullptr, 10));
        r.y = parse_double(fields[1]);
        r.u = parse_double(fields[2]);
        r.ystar = parse_double(fields[3]);
        r.w = parse_double(fields[4]);
        r.wbar = parse_double(fields[5]);
        r.e = parse_double(fields[6]);
        r.eps = parse_double(fields[7]);
        r.rho = parse_double(fields[8]);
        r.nu = parse_double(fields[9]);
        r.V = parse_double(fields[10]);
        r.theta_hat.resize(table.theta_dim);
        for (int i = 0; i < table.theta_dim; ++i) {
            r.theta_hat(i) =
                parse_double(fields[static_cast<std::size_t>(kNumFixedColumns + i)]);
        }
        table.rows.push_back(std::move(r));
    }
    return table;
}

TraceTable read_trace_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open trace file for reading: " + path);
    }
    return read_trace_csv(in);
}

}  // namespace dstep
