// SPDX-License-Identifier: MIT

#include "dstep/polynomial.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dstep {

Polynomial::Polynomial(std::vector<double> c) : coeffs(std::move(c)) {
    if (coeffs.empty()) {
        throw std::invalid_argument("Polynomial: empty coefficient list");
    }
}

Polynomial poly_mul(const Polynomial& p, const Polynomial& q) {
    std::vector<double> out(p.coeffs.size() + q.coeffs.size() - 1, 0.0);
    for (std::size_t i = 0; i < p.coeffs.size(); ++i) {
        for (std::size_t j = 0; j < q.coeffs.size(); ++j) {
            out[i + j] += p.coeffs[i] * q.coeffs[j];
        }
    }
    return Polynomial(std::move(out));
}

Polynomial normalized(const Polynomial& p) {
    std::size_t len = p.coeffs.size();
    while (len > 1 && p.coeffs[len - 1] == 0.0) {
        --len;
    }
    return Polynomial(std::vector<double>(p.coeffs.begin(),
                                          p.coeffs.begin() + len));
}

LongDivisionResult long_division(const Polynomial& A, int d) {
    if (d < 1) {
        throw std::invalid_argument("long_division: delay must be >= 1");
    }
    if (A.coeffs[0] != 1.0) {
        throw std::invalid_argument(
            "long_division: divisor must have constant coefficient 1");
    }
    const int n = A.degree();

    // Quotient coefficients from matching powers 0..d-1 of F*A = 1 - z^{-d}G:
    //   f_0 = 1,  f_k = -sum_{i=1}^{min(k,n)} a_i f_{k-i}.
    std::vector<double> f(static_cast<std::size_t>(d), 0.0);
    f[0] = 1.0;
    for (int k = 1; k < d; ++k) {
        double acc = 0.0;
        for (int i = 1; i <= std::min(k, n); ++i) {
            acc += A.coeffs[static_cast<std::size_t>(i)] *
                   f[static_cast<std::size_t>(k - i)];
        }
        f[static_cast<std::size_t>(k)] = -acc;
    }

    // Remainder from powers d..d+n-1:  g_j = -sum a_i f_{j+d-i} over the
    // window where both factors exist.
    const int glen = std::max(n, 1);
    std::vector<double> g(static_cast<std::size_t>(glen), 0.0);
    for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int i = j + 1; i <= std::min(j + d, n); ++i) {
            acc += A.coeffs[static_cast<std::size_t>(i)] *
                   f[static_cast<std::size_t>(j + d - i)];
        }
        g[static_cast<std::size_t>(j)] = -acc;
    }

    return LongDivisionResult{Polynomial(std::move(f)),
                              Polynomial(std::move(g))};
}

std::vector<std::complex<double>> zeros_in_z(const Polynomial& B) {
    if (B.coeffs[0] == 0.0) {
        throw std::invalid_argument(
            "zeros_in_z: constant coefficient must be nonzero "
            "(the delay convention requires it)");
    }
    const int m = B.degree();
    if (m == 0) {
        return {};
    }

    // Roots of the reversed polynomial b_0 z^m + ... + b_m, via the
    // companion matrix of its monic form z^m + (b_1/b_0) z^{m-1} + ...
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(m, m);
    for (int i = 1; i < m; ++i) {
        companion(i, i - 1) = 1.0;
    }
    for (int i = 0; i < m; ++i) {
        // Column of coefficients: the monic coefficient of z^{m-1-i} is
        // b_{i+1}/b_0, entering the first row with a sign flip.
        companion(0, i) = -B.coeffs[static_cast<std::size_t>(i + 1)] /
                          B.coeffs[0];
    }

    Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
    std::vector<std::complex<double>> roots(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        roots[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    }
    // Deterministic order for multiset comparisons downstream.
    std::sort(roots.begin(), roots.end(),
              [](const std::complex<double>& a, const std::complex<double>& b) {
                  if (a.real() != b.real()) return a.real() < b.real();
                  return a.imag() < b.imag();
              });
    return roots;
}

double max_zero_modulus(const Polynomial& B) {
    double out = 0.0;
    for (const auto& z : zeros_in_z(B)) {
        out = std::max(out, std::abs(z));
    }
    return out;
}

}  // namespace dstep
