// SPDX-License-Identifier: MIT
//
// Time-indexed simulation record and its CSV serialization.  Floating-point
// values are written with 17 significant digits so a written trace re-reads
// to exactly the in-memory doubles.

#ifndef DSTEP_TRACE_HPP
#define DSTEP_TRACE_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dstep/plant.hpp"

namespace dstep {

/**
 * One row of a closed-loop run at time t (the step producing output y(t)).
 *
 * Column semantics:
 *  - y, u, ystar: output, input, and reference at time t
 *  - w:    disturbance entering the plant equation at time t
 *  - wbar: filtered disturbance affecting y(t) through the predictor form,
 *          i.e. sum_i f_i * w(t - i) over the d quotient coefficients
 *  - e:    prediction error y(t) - phi(t-d).theta_hat(t-1)
 *  - eps:  tracking error ystar(t) - y(t)
 *  - rho, nu: effective estimator gate and update magnitude at this step
 *  - V:    squared parameter error against the truth in effect (NaN when
 *          the truth is unknown)
 *  - theta_hat: the estimate after this step's update
 */
struct TraceRecord {
    std::int64_t t = 0;
    double y = 0.0;
    double u = 0.0;
    double ystar = 0.0;
    double w = 0.0;
    double wbar = 0.0;
    double e = 0.0;
    double eps = 0.0;
    double rho = 0.0;
    double nu = 0.0;
    double V = 0.0;
    Eigen::VectorXd theta_hat;
};

/** A contiguous run of TraceRecords plus the context needed to replay it. */
struct SimulationTrace {
    std::int64_t t0 = 1;
    int n = 0;
    int m = 0;
    int d = 1;
    InitialCondition x0;
    std::vector<TraceRecord> rows;

    int theta_dim() const { return n + m + d; }

    /** Throws unless rows are contiguous from t0 with consistent widths. */
    void validate() const;
};

/** Writes the CSV representation (header + one line per record). */
void write_trace_csv(std::ostream& out, const SimulationTrace& trace);
void write_trace_csv_file(const std::string& path,
                          const SimulationTrace& trace);

/**
 * Reads rows back from CSV.  The CSV carries only the tabular data, so the
 * caller must supply the run context (t0 is taken from the first row; n, m,
 * d and x0 come from the experiment config when needed for analysis).
 * The theta dimension is inferred from the header.
 */
struct TraceTable {
    std::vector<TraceRecord> rows;
    int theta_dim = 0;
};
TraceTable read_trace_csv(std::istream& in);
TraceTable read_trace_csv_file(const std::string& path);

/** Formats one double with 17 significant digits (exact round-trip). */
std::string format_double(double v);

}  // namespace dstep

#endif  // DSTEP_TRACE_HPP
