// SPDX-License-Identifier: MIT
/**
 * @file mlf.hpp
 * @brief Two-parameter Mittag-Leffler function E_{a,b}(z) = sum z^n / Gamma(a n + b).
 *
 * Each evaluation chooses between the power series (summed in long double or
 * in 64-digit arithmetic, depending on cancellation) and the exponentially
 * improved large-|z| expansion, based on the error estimate each route
 * reports. Values whose exponential part would overflow a double come back
 * in scaled form: true value = value * exp(log_scale).
 */
#pragma once

#include "stable_exit/complex.hpp"

#include <complex>

namespace stable_exit {

struct MlParams {
    double a;
    double b;

    /// Throws DomainError unless 0 < a <= 2 and b is finite.
    void validate() const;
};

enum class MlMethod { taylor, asymptotic };

struct MlValue {
    std::complex<double> value;
    double abs_error_bound = 0.0;  ///< in the same scaled units as value
    MlMethod method = MlMethod::taylor;
    double log_scale = 0.0;

    [[nodiscard]] bool scaled() const noexcept { return log_scale != 0.0; }
    /// value * exp(log_scale); throws NumericalError if that overflows.
    [[nodiscard]] std::complex<double> unscaled() const;
};

/// Result of an extended-precision evaluation.
template <class R>
struct MlResult {
    Cx<R> value;
    R abs_error_bound{0};
    MlMethod method = MlMethod::taylor;
};

/**
 * @brief E_{a,b}(z) in double precision.
 *
 * The returned bound meets max(rel_tol |E|, abs_tol) whenever some route can
 * achieve it; otherwise the best available result is returned with its honest
 * bound (this happens only next to zeros, where no relative accuracy exists).
 */
MlValue ml_eval(MlParams p, std::complex<double> z, double rel_tol = 1e-13, double abs_tol = 0.0);

/**
 * @brief E_{a,b}(z) - (1/a) z^{(1-b)/a} exp(z^{1/a}) on the principal branch.
 *
 * Requires |arg z| < a pi / 2. Differences of the form exp(x q^{1/a}) - (...) E(x^a q)
 * are computed through this without cancellation.
 */
MlValue ml_eval_without_principal(MlParams p, std::complex<double> z);

/// E'_{a,a}(z) through a z E' + (a-1) E_{a,a} = E_{a,a-1}; term-wise series near 0.
MlValue ml_derivative(double a, std::complex<double> z, double rel_tol = 1e-13, double abs_tol = 0.0);

/// Large-|z| expansion only. Throws DomainError when |z| < crossover_radius.
MlValue ml_asymptotic(MlParams p, std::complex<double> z, double crossover_radius);

/// About 25 correct digits relative to the local magnitude of E.
MlResult<hp_real> ml_eval_hp(MlParams p, const Cx<hp_real>& z);
MlResult<hp_real> ml_derivative_hp(double a, const Cx<hp_real>& z);

/// long double evaluation used by the inversion oracles.
MlResult<long double> ml_eval_ld(MlParams p, const Cx<long double>& z, long double rel_tol = 1e-17L);

/**
 * @brief Smallest radius (on a coarse geometric grid starting at 10) where the
 * expansion agrees with the extended-precision series to `agreement` relative
 * on `rays` equally spaced rays.
 */
double calibrate_crossover(MlParams p, int rays = 32, double agreement = 1e-11);

/// 1/Gamma(x), exactly zero at the poles of Gamma.
double rgamma(double x);

}  // namespace stable_exit
