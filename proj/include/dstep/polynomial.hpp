// SPDX-License-Identifier: MIT
/**
 * Polynomials in the unit-delay operator.
 *
 * A Polynomial stores the coefficients of sum_i c_i z^{-i} in ascending
 * powers of z^{-1}.  The module provides the three pieces of algebra the
 * rest of the library is built on: coefficient convolution, the
 * long-division identity F*A + z^{-d}*G = 1 that produces the d-step-ahead
 * predictor, and root extraction for minimum-phase checks.
 */

#ifndef DSTEP_POLYNOMIAL_HPP
#define DSTEP_POLYNOMIAL_HPP

#include <complex>
#include <vector>

namespace dstep {

/** Real polynomial in z^{-1}; coeffs[i] multiplies z^{-i}. */
struct Polynomial {
    std::vector<double> coeffs;

    Polynomial() : coeffs{0.0} {}
    explicit Polynomial(std::vector<double> c);

    /** Degree as stored, i.e. coeffs.size() - 1 (trailing zeros count). */
    int degree() const { return static_cast<int>(coeffs.size()) - 1; }

    double operator[](std::size_t i) const { return coeffs[i]; }
};

/** Result of dividing A(z^{-1}) into one, stopping after d quotient terms:
 *  1/A = F + z^{-d} G / A, i.e. F*A + z^{-d}*G = 1 exactly. */
struct LongDivisionResult {
    Polynomial F;  ///< quotient; exactly d coefficients, F.coeffs[0] == 1
    Polynomial G;  ///< remainder; exactly max(degree(A), 1) coefficients
};

/** Coefficient convolution; degree(result) = degree(p) + degree(q). */
Polynomial poly_mul(const Polynomial& p, const Polynomial& q);

/** Strip trailing zero coefficients (idempotent; keeps at least one). */
Polynomial normalized(const Polynomial& p);

/**
 * Long division of A(z^{-1}) into 1.
 *
 * @param A  divisor with constant coefficient exactly 1
 * @param d  number of quotient coefficients to produce (the plant delay)
 * @returns  F with d coefficients (f_0 = 1) and G with max(degree(A), 1)
 *           coefficients such that F*A + z^{-d}*G = 1 holds exactly.
 * @throws std::invalid_argument if A.coeffs[0] != 1 or d < 1
 */
LongDivisionResult long_division(const Polynomial& A, int d);

/**
 * Zeros of B expressed in the forward variable z.
 *
 * Returns the values lambda with B(lambda^{-1}) = 0, i.e. the roots of the
 * reversed polynomial b_0 z^m + b_1 z^{m-1} + ... + b_m, computed from the
 * eigenvalues of its companion matrix.  degree(B) = 0 yields an empty list.
 *
 * @throws std::invalid_argument if the constant coefficient b_0 is zero
 */
std::vector<std::complex<double>> zeros_in_z(const Polynomial& B);

/** Largest modulus among zeros_in_z(B); 0.0 when there are none. */
double max_zero_modulus(const Polynomial& B);

}  // namespace dstep

#endif  // DSTEP_POLYNOMIAL_HPP
