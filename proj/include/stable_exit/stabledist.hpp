// SPDX-License-Identifier: MIT
/**
 * @file stabledist.hpp
 * @brief Laws attached to the spectrally positive stable process with
 *        E exp(-q X_t) = exp(t q^alpha), 1 < alpha <= 2.
 *
 * Everything here is a pure function of AlphaParams except the sampler, which
 * draws from a caller-owned generator.
 */
#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace stable_exit {

struct AlphaParams {
    double alpha = 0.0;
    double gamma_alpha = 0.0;   ///< Gamma(alpha)
    double gamma_2alpha = 0.0;  ///< Gamma(2 alpha)
    double gamma_2ma = 0.0;     ///< Gamma(2 - alpha)
    double lambda = 0.0;        ///< cos(pi / (2 alpha)), decay rate of exp(-x (i theta)^{1/alpha}) type factors
    double levy_const = 0.0;    ///< Levy density of upward jumps is levy_const * u^{-alpha-1}
    double scale = 0.0;         ///< X_1 = scale * Z with Z standard one-sided stable
    double cms_shift = 0.0;     ///< angle offset of the Chambers-Mallows-Stuck map
    double cms_mult = 0.0;      ///< its amplitude

    /// Throws DomainError unless 1 < alpha <= 2.
    static AlphaParams make(double alpha);
};

/// Density of X_t at x.
double stable_density_g(const AlphaParams& p, double t, double x);

/// Density at t of the first passage time below -x (x > 0); Laplace transform exp(-x q^{1/alpha}).
double hit_density_down(const AlphaParams& p, double x, double t);

/**
 * @brief Laplace transform of the first passage time to level x (either sign).
 *
 * Defined for Re q > 0 and continued analytically to |arg q| < alpha pi / 2, which
 * is what contour inversion needs.
 * For x > 0 this is the defective transform of the time of first passage above x,
 * exp(x q^{1/alpha}) - alpha x^{alpha-1} q^{1-1/alpha} E_{alpha,alpha}(x^alpha q),
 * evaluated without cancelling the two exponentially large parts.
 */
std::complex<double> hit_lt(const AlphaParams& p, double x, std::complex<double> q);

/// Density of X_t at x < c on the event that X has stayed below c on [0, t].
double no_passage_density_h(const AlphaParams& p, double x, double c, double t);

/// Per-path generator; each path seeds its own stream, so splitting paths across workers never changes results.
using RngState = std::mt19937_64;

RngState path_rng(std::uint64_t seed, std::uint64_t path);

/// One draw of X_t by the Chambers-Mallows-Stuck transform.
double sample_increment(const AlphaParams& p, double t, RngState& rng);

/// One draw of X_1 / scale from a given uniform angle in (-pi/2, pi/2) and unit exponential.
double standard_stable_from(const AlphaParams& p, double angle, double exponential);

}  // namespace stable_exit
