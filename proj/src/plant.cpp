// SPDX-License-Identifier: MIT

#include "dstep/plant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dstep {

namespace {

/** Closed interval used by the predictor-box enclosure. */
struct Interval {
    double lo = 0.0, hi = 0.0;
};

Interval iv_add(Interval x, Interval y) { return {x.lo + y.lo, x.hi + y.hi}; }

Interval iv_neg(Interval x) { return {-x.hi, -x.lo}; }

Interval iv_mul(Interval x, Interval y) {
    const double c[4] = {x.lo * y.lo, x.lo * y.hi, x.hi * y.lo, x.hi * y.hi};
    return {std::min({c[0], c[1], c[2], c[3]}),
            std::max({c[0], c[1], c[2], c[3]})};
}

}  // namespace

// ---------------------------------------------------------------------------
// PlantParameters
// ---------------------------------------------------------------------------

Polynomial PlantParameters::A_poly() const {
    std::vector<double> c(a.size() + 1);
    c[0] = 1.0;
    std::copy(a.begin(), a.end(), c.begin() + 1);
    return Polynomial(std::move(c));
}

Polynomial PlantParameters::B_poly() const { return Polynomial(b); }

void PlantParameters::validate() const {
    if (d < 1) {
        throw std::invalid_argument("PlantParameters: delay must be >= 1");
    }
    if (b.empty() || b[0] == 0.0) {
        throw std::invalid_argument(
            "PlantParameters: b_0 must exist and be nonzero");
    }
}

Eigen::VectorXd PredictorParameters::stacked() const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(alpha.size() + beta.size()));
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = alpha[i];
    }
    for (std::size_t i = 0; i < beta.size(); ++i) {
        v(static_cast<Eigen::Index>(alpha.size() + i)) = beta[i];
    }
    return v;
}

PredictorForm to_predictor(const PlantParameters& p) {
    p.validate();
    const auto div = long_division(p.A_poly(), p.d);

    PredictorForm out;
    out.F = div.F;
    // alpha: remainder coefficients, exactly n of them (the remainder is
    // zero-padded to length max(n,1), so n = 0 takes none).
    out.theta.alpha.assign(div.G.coeffs.begin(),
                           div.G.coeffs.begin() + p.n());
    // beta: quotient times the input polynomial; the product has exactly
    // m + d coefficients already, but pad defensively.
    Polynomial beta = poly_mul(div.F, p.B_poly());
    beta.coeffs.resize(static_cast<std::size_t>(p.m() + p.d), 0.0);
    out.theta.beta = beta.coeffs;
    return out;
}

// ---------------------------------------------------------------------------
// ParameterBox
// ---------------------------------------------------------------------------

int ParameterBox::gain_sign() const {
    return lower(gain_index) > 0.0 ? +1 : -1;
}

double ParameterBox::gain_floor() const {
    return std::min(std::abs(lower(gain_index)), std::abs(upper(gain_index)));
}

void ParameterBox::validate() const {
    if (lower.size() != upper.size() || lower.size() == 0) {
        throw std::invalid_argument("ParameterBox: bound shape mismatch");
    }
    if (gain_index < 0 || gain_index >= lower.size()) {
        throw std::invalid_argument("ParameterBox: gain index out of range");
    }
    for (Eigen::Index i = 0; i < lower.size(); ++i) {
        if (!(lower(i) <= upper(i))) {
            throw std::invalid_argument("ParameterBox: lower > upper");
        }
    }
    if (lower(gain_index) <= 0.0 && upper(gain_index) >= 0.0) {
        throw std::invalid_argument(
            "ParameterBox: leading-gain interval must exclude zero");
    }
}

Eigen::VectorXd project_onto_box(const Eigen::VectorXd& theta,
                                 const ParameterBox& S) {
    if (theta.size() != S.lower.size()) {
        throw std::invalid_argument("project_onto_box: dimension mismatch");
    }
    return theta.cwiseMax(S.lower).cwiseMin(S.upper);
}

double box_norm(const ParameterBox& S) {
    return S.lower.cwiseAbs().cwiseMax(S.upper.cwiseAbs()).norm();
}

// ---------------------------------------------------------------------------
// PlantCoefficientBox
// ---------------------------------------------------------------------------

void PlantCoefficientBox::validate() const {
    if (d < 1) {
        throw std::invalid_argument("PlantCoefficientBox: delay must be >= 1");
    }
    if (a_lower.size() != a_upper.size() || b_lower.size() != b_upper.size()) {
        throw std::invalid_argument("PlantCoefficientBox: bound shape mismatch");
    }
    if (b_lower.empty()) {
        throw std::invalid_argument("PlantCoefficientBox: b_0 interval missing");
    }
    for (std::size_t i = 0; i < a_lower.size(); ++i) {
        if (a_lower[i] > a_upper[i]) {
            throw std::invalid_argument("PlantCoefficientBox: a lower > upper");
        }
    }
    for (std::size_t i = 0; i < b_lower.size(); ++i) {
        if (b_lower[i] > b_upper[i]) {
            throw std::invalid_argument("PlantCoefficientBox: b lower > upper");
        }
    }
    if (b_lower[0] <= 0.0 && b_upper[0] >= 0.0) {
        throw std::invalid_argument(
            "PlantCoefficientBox: b_0 interval must exclude zero");
    }
}

PlantParameters PlantCoefficientBox::midpoint() const {
    validate();
    PlantParameters p;
    p.d = d;
    p.a.resize(a_lower.size());
    p.b.resize(b_lower.size());
    for (std::size_t i = 0; i < a_lower.size(); ++i) {
        p.a[i] = 0.5 * (a_lower[i] + a_upper[i]);
    }
    for (std::size_t i = 0; i < b_lower.size(); ++i) {
        p.b[i] = 0.5 * (b_lower[i] + b_upper[i]);
    }
    return p;
}

ParameterBox predictor_box_from_coefficients(const PlantCoefficientBox& box) {
    box.validate();
    const int n = box.n();
    const int m = box.m();
    const int d = box.d;

    // Interval versions of the long-division recursions.  f_0 = [1, 1];
    // f_k = -sum a_i f_{k-i}; g_j = -sum a_i f_{j+d-i}; beta = conv(F, B).
    std::vector<Interval> a(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        a[static_cast<std::size_t>(i)] = {box.a_lower[static_cast<std::size_t>(i)],
                                          box.a_upper[static_cast<std::size_t>(i)]};
    }
    std::vector<Interval> f(static_cast<std::size_t>(d), Interval{0.0, 0.0});
    f[0] = {1.0, 1.0};
    for (int k = 1; k < d; ++k) {
        Interval acc{0.0, 0.0};
        for (int i = 1; i <= std::min(k, n); ++i) {
            acc = iv_add(acc, iv_mul(a[static_cast<std::size_t>(i - 1)],
                                     f[static_cast<std::size_t>(k - i)]));
        }
        f[static_cast<std::size_t>(k)] = iv_neg(acc);
    }

    std::vector<Interval> alpha(static_cast<std::size_t>(n), Interval{0.0, 0.0});
    for (int j = 0; j < n; ++j) {
        Interval acc{0.0, 0.0};
        for (int i = j + 1; i <= std::min(j + d, n); ++i) {
            acc = iv_add(acc, iv_mul(a[static_cast<std::size_t>(i - 1)],
                                     f[static_cast<std::size_t>(j + d - i)]));
        }
        alpha[static_cast<std::size_t>(j)] = iv_neg(acc);
    }

    std::vector<Interval> bcoef(static_cast<std::size_t>(m + 1));
    for (int i = 0; i <= m; ++i) {
        bcoef[static_cast<std::size_t>(i)] = {box.b_lower[static_cast<std::size_t>(i)],
                                              box.b_upper[static_cast<std::size_t>(i)]};
    }
    std::vector<Interval> beta(static_cast<std::size_t>(m + d), Interval{0.0, 0.0});
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j <= m; ++j) {
            beta[static_cast<std::size_t>(i + j)] =
                iv_add(beta[static_cast<std::size_t>(i + j)],
                       iv_mul(f[static_cast<std::size_t>(i)],
                              bcoef[static_cast<std::size_t>(j)]));
        }
    }

    ParameterBox out;
    out.lower.resize(n + m + d);
    out.upper.resize(n + m + d);
    out.gain_index = n;
    for (int i = 0; i < n; ++i) {
        out.lower(i) = alpha[static_cast<std::size_t>(i)].lo;
        out.upper(i) = alpha[static_cast<std::size_t>(i)].hi;
    }
    for (int i = 0; i < m + d; ++i) {
        out.lower(n + i) = beta[static_cast<std::size_t>(i)].lo;
        out.upper(n + i) = beta[static_cast<std::size_t>(i)].hi;
    }
    out.validate();
    return out;
}

MinimumPhaseReport check_assumption1(
    const std::vector<PlantParameters>& sample) {
    if (sample.empty()) {
        throw std::invalid_argument("check_assumption1: empty sample");
    }
    MinimumPhaseReport report;
    report.ok = true;
    const bool sign_positive = sample.front().b[0] > 0.0;
    for (const auto& p : sample) {
        p.validate();
        const double r = max_zero_modulus(p.B_poly());
        report.lambda_under = std::max(report.lambda_under, r);
        const bool stable = r < 1.0;
        const bool same_sign = (p.b[0] > 0.0) == sign_positive;
        if (!stable || !same_sign) {
            report.ok = false;
            if (!stable) ++report.violations;
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Dynamics
// ---------------------------------------------------------------------------

double plant_step(const PlantParameters& p, std::span<const double> y_hist,
                  std::span<const double> u_hist, double w) {
    const int n = p.n();
    const int m = p.m();
    if (static_cast<int>(y_hist.size()) < n ||
        static_cast<int>(u_hist.size()) < m + 1) {
        throw std::invalid_argument("plant_step: insufficient history");
    }
    double y = w;
    for (int i = 0; i < n; ++i) {
        y -= p.a[static_cast<std::size_t>(i)] * y_hist[static_cast<std::size_t>(i)];
    }
    for (int i = 0; i <= m; ++i) {
        y += p.b[static_cast<std::size_t>(i)] * u_hist[static_cast<std::size_t>(i)];
    }
    return y;
}

double predictor_step(const PredictorParameters& theta,
                      const Eigen::VectorXd& phi, double wbar_value) {
    const Eigen::VectorXd th = theta.stacked();
    if (th.size() != phi.size()) {
        throw std::invalid_argument("predictor_step: dimension mismatch");
    }
    return th.dot(phi) + wbar_value;
}

double wbar(const Polynomial& F, std::span<const double> w_window) {
    const std::size_t d = F.coeffs.size();
    if (w_window.size() != d) {
        throw std::invalid_argument("wbar: window must have d values");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        acc += F.coeffs[i] * w_window[d - 1 - i];
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Initialization and schedules
// ---------------------------------------------------------------------------

void InitialCondition::validate(int n, int m, int d) const {
    if (static_cast<int>(y_hist.size()) != n + d - 1) {
        throw std::invalid_argument(
            "InitialCondition: output history must hold n+d-1 values");
    }
    if (static_cast<int>(u_hist.size()) != m + 2 * d - 1) {
        throw std::invalid_argument(
            "InitialCondition: input history must hold m+2d-1 values");
    }
}

double InitialCondition::norm() const {
    double acc = 0.0;
    for (double v : y_hist) acc += v * v;
    for (double v : u_hist) acc += v * v;
    return std::sqrt(acc);
}

InitialCondition InitialCondition::zero(int n, int m, int d) {
    InitialCondition x0;
    x0.y_hist.assign(static_cast<std::size_t>(n + d - 1), 0.0);
    x0.u_hist.assign(static_cast<std::size_t>(m + 2 * d - 1), 0.0);
    return x0;
}

double CoefficientSpec::value(std::int64_t t) const {
    const double arg =
        frequency * (static_cast<double>(t) + time_shift) + phase;
    const double w = (waveform == Waveform::kCos) ? std::cos(arg) : std::sin(arg);
    return offset + amplitude * w;
}

CoefficientSpec CoefficientSpec::constant(double value) {
    CoefficientSpec s;
    s.offset = value;
    return s;
}

PlantSchedule PlantSchedule::constant(PlantParameters p) {
    p.validate();
    PlantSchedule s;
    s.kind = Kind::kConstant;
    s.d = p.d;
    s.a_const = std::move(p.a);
    s.b_const = std::move(p.b);
    return s;
}

int PlantSchedule::n() const {
    switch (kind) {
        case Kind::kConstant: return static_cast<int>(a_const.size());
        case Kind::kSinusoidal: return static_cast<int>(a_spec.size());
        case Kind::kTabulated:
            return a_rows.empty() ? 0 : static_cast<int>(a_rows.front().size());
    }
    return 0;
}

int PlantSchedule::m() const {
    switch (kind) {
        case Kind::kConstant: return static_cast<int>(b_const.size()) - 1;
        case Kind::kSinusoidal: return static_cast<int>(b_spec.size()) - 1;
        case Kind::kTabulated:
            return b_rows.empty() ? -1
                                  : static_cast<int>(b_rows.front().size()) - 1;
    }
    return -1;
}

PlantParameters PlantSchedule::at(std::int64_t t) const {
    PlantParameters p;
    p.d = d;
    switch (kind) {
        case Kind::kConstant:
            p.a = a_const;
            p.b = b_const;
            break;
        case Kind::kSinusoidal:
            p.a.resize(a_spec.size());
            p.b.resize(b_spec.size());
            for (std::size_t i = 0; i < a_spec.size(); ++i) {
                p.a[i] = a_spec[i].value(t);
            }
            for (std::size_t i = 0; i < b_spec.size(); ++i) {
                p.b[i] = b_spec[i].value(t);
            }
            break;
        case Kind::kTabulated: {
            const std::int64_t last =
                table_start + static_cast<std::int64_t>(a_rows.size()) - 1;
            const std::int64_t k = std::clamp(t, table_start, last);
            const std::size_t row = static_cast<std::size_t>(k - table_start);
            p.a = a_rows[row];
            p.b = b_rows[row];
            break;
        }
    }
    return p;
}

void PlantSchedule::validate() const {
    if (d < 1) {
        throw std::invalid_argument("PlantSchedule: delay must be >= 1");
    }
    switch (kind) {
        case Kind::kConstant:
            at(0).validate();
            break;
        case Kind::kSinusoidal:
            if (b_spec.empty()) {
                throw std::invalid_argument("PlantSchedule: b_0 spec missing");
            }
            break;
        case Kind::kTabulated:
            if (a_rows.size() != b_rows.size() || a_rows.empty()) {
                throw std::invalid_argument(
                    "PlantSchedule: tabulated rows missing or mismatched");
            }
            for (std::size_t k = 0; k < a_rows.size(); ++k) {
                if (static_cast<int>(a_rows[k].size()) != n() ||
                    static_cast<int>(b_rows[k].size()) != m() + 1) {
                    throw std::invalid_argument(
                        "PlantSchedule: tabulated row shape mismatch");
                }
            }
            break;
    }
}

}  // namespace dstep
