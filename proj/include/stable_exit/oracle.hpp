// SPDX-License-Identifier: MIT
/**
 * @file oracle.hpp
 * @brief Independent checks on the residue series: numerical inversion of the
 *        exact transforms, the alternating convolution series for k, and the
 *        Brownian closed form.
 *
 * Nothing here touches a RootTable. The transforms are built from mlf and
 * stabledist alone, so agreement with exitlaw is a genuine cross-check.
 *
 * The inverters evaluate the transform once on a fixed node set and reuse it for
 * every t, which is what makes dense time grids affordable.
 */
#pragma once

#include "stable_exit/exitlaw.hpp"
#include "stable_exit/stabledist.hpp"

#include <complex>
#include <vector>

namespace stable_exit {

struct QuadratureConfig {
    enum class Truncation { fixed, decay_driven };

    double abs_tol = 1e-16;  ///< accepted size of the discarded tail of the inversion integral
    double rel_tol = 1e-15;  ///< passed to the Mittag-Leffler evaluations
    int max_panels = 200000;
    Truncation truncation = Truncation::decay_driven;
    double fixed_radius = 0.0;  ///< truncation radius when truncation == fixed

    /// Throws DomainError unless both tolerances and max_panels are positive.
    void validate() const;
};

/**
 * @brief psi_s(t) = (1/pi) int_0^Theta Re[H_s(-i theta) e^{-i theta t}] d theta.
 *
 * Composite Gauss-Legendre on the positive imaginary axis, panels sized for
 * t <= t_max. With decay_driven truncation, panels are added until the last one's
 * largest |H_s| times the analytic tail factor of exp(-lambda (1 - s^{1/alpha}) theta^{1/alpha})
 * drops below abs_tol.
 */
class PsiFourierOracle {
public:
    /// `mirrored` also stores H_s(+i theta) so that density_complex can integrate both half-lines independently.
    PsiFourierOracle(const AlphaParams& p, double s, double t_max = 10.0, QuadratureConfig cfg = {},
                     bool mirrored = false);

    [[nodiscard]] double density(double t) const;
    /// (1/2 pi) int_{-Theta}^{Theta} H_s(-i theta) e^{-i theta t} d theta without folding; requires `mirrored`.
    [[nodiscard]] std::complex<double> density_complex(double t) const;
    /// int_0^{t0} t^m e^{-shift t} psi_s(t) dt.
    [[nodiscard]] double integral_below(double t0, int m = 0, double shift = 0.0) const;

    [[nodiscard]] double truncation_radius() const noexcept { return theta_max_; }
    [[nodiscard]] std::size_t node_count() const noexcept { return theta_.size(); }

private:
    double t_max_;
    double theta_max_ = 0.0;
    std::vector<long double> theta_;
    std::vector<long double> weight_;
    std::vector<std::complex<long double>> lower_;  ///< H_s(-i theta)
    std::vector<std::complex<long double>> upper_;  ///< H_s(+i theta), only when mirrored
};

/**
 * @brief Inverts the transform of l along the rays arg q = +-beta, pi/2 < beta < alpha pi / 2.
 *
 * For x >= 0 the kernel jumps at t = 0+ with nonzero slope, so its transform decays only
 * like q^{-2} on the imaginary axis. On the wedge exp(q t) decays instead, and the
 * transform is assembled from Mittag-Leffler values with their principal exponential
 * removed, so the exponentially large parts of the two products cancel exactly.
 */
class UpperKernelOracle {
public:
    /// Densities are available for t in [t_min, t_max].
    UpperKernelOracle(const AlphaParams& p, const IntervalSpec& spec, double t_min = 1e-3, double t_max = 10.0,
                      QuadratureConfig cfg = {});

    [[nodiscard]] double density(double t) const;
    /// int_0^{t0} t^m l(t) dt.
    [[nodiscard]] double integral_below(double t0, int m = 0) const;
    /// W(c) W(b+x) / W(b+c) - W(x_+) at q, |arg q| < alpha pi / 2.
    [[nodiscard]] std::complex<double> transform(std::complex<double> q) const;

    [[nodiscard]] std::size_t node_count() const noexcept { return node_.size(); }

private:
    AlphaParams p_;
    IntervalSpec spec_;
    double t_min_, t_max_;
    std::vector<std::complex<double>> node_;
    std::vector<std::complex<double>> weight_;  ///< includes the ray direction
    std::vector<std::complex<double>> value_;
};

/// One evaluation of psi_s(t) on the imaginary axis; builds a fresh PsiFourierOracle.
double fourier_invert_psi(const AlphaParams& p, double s, double t, const QuadratureConfig& cfg = {});

/// One evaluation of l(t); builds a fresh UpperKernelOracle.
double fourier_invert_l(const AlphaParams& p, const IntervalSpec& spec, double t, const QuadratureConfig& cfg = {});

/// Laplace transform of k: W(c) / W(b+c) = c^{a-1} E(c^a q) / ((b+c)^{a-1} E((b+c)^a q)).
std::complex<double> lower_exit_lt(const AlphaParams& p, const IntervalSpec& spec, std::complex<double> q);

/**
 * @brief Transform of the first n_terms of the alternating convolution series,
 *        F_{-b} (1 - F_c F_{-c}) sum_{n < n_terms} (F_{b+c} F_{-b-c})^n, from hit_lt products.
 */
std::complex<double> convolution_series_lt(const AlphaParams& p, const IntervalSpec& spec, std::complex<double> q,
                                           int n_terms);

struct ConvolutionValue {
    double value = 0.0;
    double omitted_term = 0.0;   ///< size of the first term left out
    double grid_change = 0.0;    ///< |value(h/2) - value(h)|
    int n_terms = 0;

    [[nodiscard]] double bound() const noexcept { return omitted_term + grid_change; }
};

/**
 * @brief k(t) from the alternating convolution series, on a uniform grid.
 *
 * f_{-b} comes from stabledist; the return-time densities u_x = f_x * f_{-x} are
 * inverted from hit_lt on the wedge. Convolutions use the trapezoid rule with
 * `grid_points` and twice as many; their difference enters the bound.
 */
ConvolutionValue convolution_series_k(const AlphaParams& p, const IntervalSpec& spec, double t, int n_terms,
                                      int grid_points = 400);

/// Brownian lower-exit density with X_t = B_{2t}.
double brownian_lower_exit_density(double b, double c, double t);

}  // namespace stable_exit
