// SPDX-License-Identifier: MIT
/**
 * Plant and predictor-form representations.
 *
 * The plant is the difference equation
 *
 *   y(t) + a_1 y(t-1) + ... + a_n y(t-n)
 *       = b_0 u(t-d) + ... + b_m u(t-d-m) + w(t),
 *
 * with b_0 != 0 so the input-output delay is exactly d.  Long division of
 * A(z^{-1}) into one rewrites it in d-step-ahead predictor form
 *
 *   y(t+d) = phi(t)^T theta* + wbar(t),
 *   phi(t) = [y(t)..y(t-n+1), u(t)..u(t-m-d+1)],
 *
 * where theta* stacks alpha_0..alpha_{n-1} (the remainder G) and
 * beta_0..beta_{m+d-1} (the product F*B), and wbar is the quotient-filtered
 * disturbance.  This header holds both forms, the admissible parameter box
 * used by the projection estimator, the minimum-phase check, and the
 * coefficient schedules for time-varying plants.
 */

#ifndef DSTEP_PLANT_HPP
#define DSTEP_PLANT_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

#include "dstep/polynomial.hpp"

namespace dstep {

// ---------------------------------------------------------------------------
// Parameterizations
// ---------------------------------------------------------------------------

/** Plant coefficients at one instant; a_0 = 1 is implicit. */
struct PlantParameters {
    int d = 1;               ///< delay, >= 1
    std::vector<double> a;   ///< a_1..a_n (may be empty)
    std::vector<double> b;   ///< b_0..b_m, b_0 != 0

    int n() const { return static_cast<int>(a.size()); }
    int m() const { return static_cast<int>(b.size()) - 1; }
    /** Regressor / predictor-parameter dimension n + m + d. */
    int dim() const { return n() + m() + d; }

    Polynomial A_poly() const;  ///< 1 + a_1 z^{-1} + ... + a_n z^{-n}
    Polynomial B_poly() const;  ///< b_0 + ... + b_m z^{-m}

    /** @throws std::invalid_argument on d < 1, empty b, or b_0 == 0. */
    void validate() const;
};

/** Predictor-form parameters theta* = [alpha; beta]. */
struct PredictorParameters {
    std::vector<double> alpha;  ///< alpha_0..alpha_{n-1}
    std::vector<double> beta;   ///< beta_0..beta_{m+d-1}, beta_0 = b_0

    Eigen::VectorXd stacked() const;
};

/**
 * Map plant coefficients to predictor-form parameters: alpha is the long
 * division remainder G (truncated to n entries), beta = F*B with exactly
 * m + d entries.  The quotient F is returned as well since the filtered
 * disturbance needs it.
 */
struct PredictorForm {
    PredictorParameters theta;
    Polynomial F;  ///< d quotient coefficients, f_0 = 1
};
PredictorForm to_predictor(const PlantParameters& p);

// ---------------------------------------------------------------------------
// Admissible set
// ---------------------------------------------------------------------------

/**
 * Axis-aligned box realizing the compact convex admissible set in
 * predictor-parameter space.  The coordinate at gain_index houses beta_0 and
 * its interval must exclude zero (known-sign leading gain).
 */
struct ParameterBox {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    Eigen::Index gain_index = 0;  ///< position of beta_0, i.e. n

    Eigen::Index dim() const { return lower.size(); }
    /** +1 or -1 according to the beta_0 interval. */
    int gain_sign() const;
    /** Smallest attainable |beta_0| inside the box. */
    double gain_floor() const;
    /** @throws std::invalid_argument on shape errors or a beta_0 interval
     *  containing zero. */
    void validate() const;
};

/** Euclidean projection onto the box (per-coordinate clamp). */
Eigen::VectorXd project_onto_box(const Eigen::VectorXd& theta,
                                 const ParameterBox& S);

/** max_{x in box} ||x||_2, attained at the corner of per-axis maxima. */
double box_norm(const ParameterBox& S);

/**
 * Per-coefficient interval description of an admissible plant family, used
 * to sample test plants and to build an enclosing predictor-space box.
 */
struct PlantCoefficientBox {
    int d = 1;
    std::vector<double> a_lower, a_upper;  ///< intervals for a_1..a_n
    std::vector<double> b_lower, b_upper;  ///< intervals for b_0..b_m

    int n() const { return static_cast<int>(a_lower.size()); }
    int m() const { return static_cast<int>(b_lower.size()) - 1; }
    void validate() const;
    /** Midpoint plant of the box. */
    PlantParameters midpoint() const;
};

/**
 * Enclosing predictor-space box for all plants in the coefficient box,
 * computed by running interval arithmetic through the long-division
 * recursions and the beta = F*B convolution.  Exact for d = 1; a
 * conservative superset for d > 1 (the true image is not box-shaped).
 * Requires a sign-definite b_0 interval.
 */
ParameterBox predictor_box_from_coefficients(const PlantCoefficientBox& box);

/** Result of sampling a plant family for the minimum-phase assumption. */
struct MinimumPhaseReport {
    bool ok = false;            ///< all sampled B stable in z and b_0 sign constant
    double lambda_under = 0.0;  ///< max sampled zero modulus (decay-rate floor)
    std::size_t violations = 0; ///< samples with a zero outside the open unit disk
};

/** Check every sampled plant's B-zeros and b_0 sign. */
MinimumPhaseReport check_assumption1(
    const std::vector<PlantParameters>& sample);

// ---------------------------------------------------------------------------
// Dynamics
// ---------------------------------------------------------------------------

/**
 * One step of the direct plant recursion.
 *
 * @param y_hist  y(t-1), y(t-2), ..., y(t-n)   (most recent first)
 * @param u_hist  u(t-d), u(t-d-1), ..., u(t-d-m) (most recent first)
 * @returns y(t) = -sum a_i y(t-i) + sum b_i u(t-d-i) + w
 * @throws std::invalid_argument on insufficient history
 */
double plant_step(const PlantParameters& p, std::span<const double> y_hist,
                  std::span<const double> u_hist, double w);

/** Predictor recursion: y(t+d) = phi(t)^T theta* + wbar(t). */
double predictor_step(const PredictorParameters& theta,
                      const Eigen::VectorXd& phi, double wbar);

/**
 * Quotient-filtered disturbance over one delay window.
 *
 * @param F        long-division quotient (d coefficients)
 * @param w_window d disturbance values in ascending time order; for the
 *                 formation-time value wbar(t) pass w(t+1)..w(t+d)
 * @returns f_0 w(t+d) + f_1 w(t+d-1) + ... + f_{d-1} w(t+1)
 */
double wbar(const Polynomial& F, std::span<const double> w_window);

// ---------------------------------------------------------------------------
// Initialization and schedules
// ---------------------------------------------------------------------------

/** Exactly the output/input history a run starting at t_0 needs. */
struct InitialCondition {
    std::vector<double> y_hist;  ///< y(t_0-1), ..., y(t_0-n-d+1): n+d-1 values
    std::vector<double> u_hist;  ///< u(t_0-1), ..., u(t_0-m-2d+1): m+2d-1 values

    /** @throws std::invalid_argument when lengths do not match the orders */
    void validate(int n, int m, int d) const;
    double norm() const;
    static InitialCondition zero(int n, int m, int d);
};

/** One sinusoidally scheduled coefficient:
 *  value(t) = offset + amplitude * wave(frequency * (t + time_shift) + phase). */
struct CoefficientSpec {
    enum class Waveform { kCos, kSin };
    double offset = 0.0;
    double amplitude = 0.0;
    double frequency = 0.0;
    double phase = 0.0;
    double time_shift = 0.0;
    Waveform waveform = Waveform::kCos;

    double value(std::int64_t t) const;
    static CoefficientSpec constant(double value);
};

/** Time-indexed plant description: constant, sinusoidal, or tabulated.
 *  at(t) returns the coefficients in effect when y(t) is produced. */
struct PlantSchedule {
    enum class Kind { kConstant, kSinusoidal, kTabulated };
    Kind kind = Kind::kConstant;
    int d = 1;

    // kConstant
    std::vector<double> a_const, b_const;

    // kSinusoidal
    std::vector<CoefficientSpec> a_spec, b_spec;

    // kTabulated: row k applies at t = table_start + k, clamped at the ends
    std::int64_t table_start = 0;
    std::vector<std::vector<double>> a_rows, b_rows;

    static PlantSchedule constant(PlantParameters p);

    int n() const;
    int m() const;
    int dim() const { return n() + m() + d; }
    bool time_invariant() const { return kind == Kind::kConstant; }

    PlantParameters at(std::int64_t t) const;
    void validate() const;
};

}  // namespace dstep

#endif  // DSTEP_PLANT_HPP
