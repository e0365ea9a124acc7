// SPDX-License-Identifier: MIT
/**
 * @file exitlaw.hpp
 * @brief Two-sided exit of the spectrally positive stable process from [-b, c].
 *
 * Time densities are residue series over the zeros of E_{alpha,alpha}. Each series
 * value carries a certified bound on what was left out; where that bound cannot be
 * met the evaluator throws ReliabilityError instead of returning a poor number, and
 * the caller is expected to switch to one of the inversion oracles.
 */
#pragma once

#include "stable_exit/roots.hpp"
#include "stable_exit/stabledist.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

namespace stable_exit {

struct IntervalSpec {
    double b = 1.0;
    double c = 1.0;
    std::optional<double> x;  ///< pre-exit position, required by the upper-exit laws

    /// Throws DomainError unless b, c > 0 and, when present, -b < x < c.
    void validate() const;
    [[nodiscard]] double width() const noexcept { return b + c; }
    /// c^alpha / (b + c)^alpha
    [[nodiscard]] double s(double alpha) const;
    /// (b + x)^alpha / (b + c)^alpha; requires x.
    [[nodiscard]] double v(double alpha) const;
    /// x / (b + c) = s^{1/alpha} + v^{1/alpha} - 1
    [[nodiscard]] double relative_position() const;
};

struct SeriesValue {
    double value = 0.0;
    double tail_bound = 0.0;      ///< discarded terms, from the calibrated tail model
    double rounding_bound = 0.0;  ///< cancellation among the retained terms
    int truncation_index = 0;     ///< highest annulus whose roots were summed

    [[nodiscard]] double error_bound() const noexcept { return tail_bound + rounding_bound; }
};

/// p_lower = c^{alpha-1} / (b+c)^{alpha-1}, p_upper = 1 - p_lower.
std::pair<double, double> exit_side_probability(double alpha, const IntervalSpec& spec);

/// n-th moment of the scaled lower-exit law with parameter s, by power-series division (n <= 10).
double mu_moment(double alpha, double s, int n);

/// Density of the pre-exit position on the event of upper exit; zero outside (-b, c).
double undershoot_density(double alpha, const IntervalSpec& spec);

/// Rounding bound for undershoot_density; the subtraction cancels as x -> c.
double undershoot_density_error(double alpha, const IntervalSpec& spec);

/// P(jump > u | pre-exit position x): the Pareto survival min(1, ((c - x) / u)^alpha).
double jump_survival(double alpha, const IntervalSpec& spec, double u);

/// Total mass of l: [c^{a-1}(b+x)^{a-1}/(b+c)^{a-1} - x_+^{a-1}] / Gamma(alpha).
double upper_kernel_mass(double alpha, const IntervalSpec& spec);

/// ln k(t) / t -> this rate as t -> infinity: -rho / (b + c)^alpha.
double tail_rate(const RootTable& roots, const IntervalSpec& spec);

/**
 * @brief Residue-series evaluator bound to one root table.
 *
 * Coefficients at each root are computed in 64-digit arithmetic once per
 * parameter set and cached; the object is safe to share across threads.
 */
class ExitLaw {
public:
    ExitLaw(AlphaParams params, std::shared_ptr<const RootTable> roots);

    /// Convenience: enumerate `pairs` conjugate pairs and bind them.
    static ExitLaw with_roots(double alpha, int pairs = 200);

    [[nodiscard]] const AlphaParams& params() const noexcept { return params_; }
    [[nodiscard]] const RootTable& roots() const noexcept { return *roots_; }

    /**
     * @brief Density of the scaled lower-exit time at scaled time t.
     * @param max_index sum only roots below the separating circle of this annulus (0 = whole table)
     */
    [[nodiscard]] SeriesValue psi(double s, double t, int max_index = 0) const;
    [[nodiscard]] double psi_density(double s, double t) const { return psi(s, t).value; }

    /// Smallest scaled time at which psi(s, .) certifies its tolerance.
    [[nodiscard]] double reliability_floor(double s) const;

    /**
     * @brief int_{t0}^infinity t^m e^{-shift t} psi_s(t) dt, integrated term by term.
     *
     * `shift` may be negative down to (but excluding) -rho.
     */
    [[nodiscard]] SeriesValue psi_integral_above(double s, double t0, int m = 0, double shift = 0.0) const;

    /// Lower-exit density k(t) in the original time scale.
    [[nodiscard]] SeriesValue lower_exit_k(const IntervalSpec& spec, double t) const;

    /// Kernel l(t) of the upper-exit time: density of X_t at x before leaving (-b, c).
    [[nodiscard]] SeriesValue upper_kernel_l(const IntervalSpec& spec, double t) const;
    [[nodiscard]] double reliability_floor_l(const IntervalSpec& spec) const;  ///< in original time
    /// int_{t0}^infinity t^m l(t) dt in original time.
    [[nodiscard]] SeriesValue upper_kernel_integral_above(const IntervalSpec& spec, double t0, int m = 0) const;

    /// l(t) normalized to a probability density: the upper-exit time given the pre-exit position.
    [[nodiscard]] SeriesValue upper_time_p(const IntervalSpec& spec, double t) const;

    /// Joint sub-density of (exit time, pre-exit position x, jump u) on upper exit.
    [[nodiscard]] double joint_upper_density(const IntervalSpec& spec, double t, double u) const;

private:
    struct Coefficients;
    const Coefficients& coefficients(double s, std::optional<double> v) const;
    SeriesValue sum(const Coefficients& co, double t, int max_index, int m, double shift, bool integral) const;
    double floor_of(const Coefficients& co) const;

    AlphaParams params_;
    std::shared_ptr<const RootTable> roots_;
    std::vector<double> slot_radius_;  ///< separating radii by annulus index
    mutable std::mutex mutex_;
    mutable std::map<std::pair<double, double>, std::shared_ptr<Coefficients>> cache_;
};

}  // namespace stable_exit
