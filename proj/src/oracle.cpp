// SPDX-License-Identifier: MIT
#include "stable_exit/oracle.hpp"

#include "stable_exit/errors.hpp"
#include "stable_exit/mlf.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <utility>

namespace stable_exit {
namespace {

using cd = std::complex<double>;
using ld = long double;
using cld = std::complex<long double>;
constexpr double kPi = std::numbers::pi;

struct Rule {
    std::vector<double> x;  ///< on [-1, 1]
    std::vector<double> w;
};

template <unsigned N>
const Rule& gauss_rule() {
    static const Rule rule = [] {
        using G = boost::math::quadrature::gauss<double, N>;
        Rule r;
        const auto& xs = G::abscissa();
        const auto& ws = G::weights();
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (xs[i] == 0.0) {
                r.x.push_back(0.0);
                r.w.push_back(ws[i]);
                continue;
            }
            r.x.push_back(-xs[i]);
            r.w.push_back(ws[i]);
            r.x.push_back(xs[i]);
            r.w.push_back(ws[i]);
        }
        return r;
    }();
    return rule;
}

/// num / den for two possibly scaled Mittag-Leffler values.
cd ratio(const MlValue& num, const MlValue& den) {
    return num.value / den.value * std::exp(num.log_scale - den.log_scale);
}

/// int_0^{t0} t^m e^{z t} dt, entire in z.
cd moment_kernel(cd z, double t0, int m) {
    const double mag = std::abs(z) * t0;
    if (mag < 1.5) {
        // sum_k z^k t0^{k+m+1} / (k! (k+m+1))
        cd power(1.0, 0.0), sum(0.0, 0.0);
        const cd zt = z * t0;
        for (int k = 0; k < 60; ++k) {
            const cd term = power / static_cast<double>(k + m + 1);
            sum += term;
            if (std::abs(term) < 1e-19 * std::abs(sum)) break;
            power *= zt / static_cast<double>(k + 1);
        }
        return sum * std::pow(t0, m + 1);
    }
    // F(t) = e^{zt} sum_j (-1)^j m!/(m-j)! t^{m-j} / z^{j+1}, result F(t0) - F(0)
    cd acc(0.0, 0.0);
    double falling = 1.0;
    cd zpow = z;
    for (int j = 0; j <= m; ++j) {
        acc += (j % 2 == 0 ? 1.0 : -1.0) * falling * std::pow(t0, m - j) / zpow;
        falling *= static_cast<double>(m - j);
        zpow *= z;
    }
    double fact = 1.0;
    for (int j = 2; j <= m; ++j) fact *= j;
    const cd at_zero = (m % 2 == 0 ? 1.0 : -1.0) * fact / std::pow(z, m + 1);
    return std::exp(z * t0) * acc - at_zero;
}

/// Rays of the inversion wedge: halfway between the imaginary axis and arg = alpha pi / 2.
double wedge_angle(double alpha) { return 0.5 * kPi + 0.25 * (alpha - 1.0) * kPi; }

/**
 * Nodes along r e^{i beta}, r >= 0. Panels are uniform up to a radius where exp(q t_max)
 * has decayed, then geometric, so that for every t in [t_min, t_max] each panel holds
 * only a few oscillations of exp(q t) while it is still non-negligible.
 */
struct Wedge {
    double beta = 0.0;
    double t_min = 0.0, t_max = 0.0;
    std::vector<cd> node, weight, value;

    void build(double alpha, double tmin, double tmax, const QuadratureConfig& cfg,
               const std::function<cd(cd)>& transform) {
        require(tmin > 0.0 && tmax >= tmin, "wedge inversion: need 0 < t_min <= t_max");
        beta = wedge_angle(alpha);
        t_min = tmin;
        t_max = tmax;
        const cd dir = std::polar(1.0, beta);
        const double decay = -std::cos(beta);
        const double linear_width = std::min(1.0, 2.0 / t_max);
        const double linear_end = 40.0 * linear_width;
        const double needed = 45.0 / (t_min * decay);
        int panels = 0;
        // Hit-time transforms carry q^{1/alpha}, a branch point at the vertex; dyadic panels
        // towards 0 restore geometric convergence there.
        double r = linear_width * 1e-16;
        for (double lo = r; lo < linear_width; lo *= 2.0) {
            const double hi = std::min(2.0 * lo, linear_width);
            append(gauss_rule<20>(), lo, hi, dir, transform);
            ++panels;
            r = hi;
        }
        while (true) {
            const bool linear = r < linear_end;
            const double next = linear ? r + linear_width : r * 1.1;
            const double biggest = append(linear ? gauss_rule<20>() : gauss_rule<30>(), r, next, dir, transform);
            r = next;
            if (++panels > cfg.max_panels) throw NumericalError("wedge inversion: max_panels reached");
            if (cfg.truncation == QuadratureConfig::Truncation::fixed) {
                if (r >= cfg.fixed_radius && r >= linear_end) break;
            } else if (r >= needed && biggest < cfg.abs_tol) {
                break;
            }
        }
    }

    [[nodiscard]] double density(double t) const;

private:
    /// Adds one panel [lo, hi] along the ray; returns the largest |transform| on it.
    double append(const Rule& rule, double lo, double hi, cd dir, const std::function<cd(cd)>& transform) {
        double biggest = 0.0;
        for (std::size_t i = 0; i < rule.x.size(); ++i) {
            const double ri = 0.5 * (lo + hi) + 0.5 * (hi - lo) * rule.x[i];
            const cd z = ri * dir;
            const cd f = transform(z);
            if (!std::isfinite(f.real()) || !std::isfinite(f.imag()))
                throw NumericalError("wedge inversion: transform is not finite at |q| = " + std::to_string(ri));
            node.push_back(z);
            weight.push_back(0.5 * (hi - lo) * rule.w[i] * dir);
            value.push_back(f);
            biggest = std::max(biggest, std::abs(f));
        }
        return biggest;
    }
};

using Span = std::span<const cd>;

/// (1/pi) Im sum F(q) e^{q t} dq over one ray; the other ray is its conjugate.
double wedge_density(Span node, Span weight, Span value, double t) {
    long double im = 0.0L;
    for (std::size_t i = 0; i < node.size(); ++i) {
        if (t * node[i].real() < -745.0) break;
        im += (value[i] * std::exp(node[i] * t) * weight[i]).imag();
    }
    return static_cast<double>(im) / kPi;
}

double wedge_integral_below(Span node, Span weight, Span value, double t0, int m) {
    long double im = 0.0L;
    for (std::size_t i = 0; i < node.size(); ++i) im += (value[i] * moment_kernel(node[i], t0, m) * weight[i]).imag();
    return static_cast<double>(im) / kPi;
}

void require_in_range(double t, double t_min, double t_max) {
    require(t >= t_min * (1.0 - 1e-12) && t <= t_max * (1.0 + 1e-12),
            "wedge inversion: t outside the range the nodes were built for");
}

double Wedge::density(double t) const {
    require_in_range(t, t_min, t_max);
    return wedge_density(node, weight, value, t);
}

}  // namespace

void QuadratureConfig::validate() const {
    require(abs_tol > 0.0 && rel_tol > 0.0, "QuadratureConfig: tolerances must be positive");
    require(max_panels > 0, "QuadratureConfig: max_panels must be positive");
    require(truncation == Truncation::decay_driven || fixed_radius > 0.0,
            "QuadratureConfig: fixed truncation needs a positive radius");
}

// ---------------------------------------------------------------------------
// psi on the imaginary axis

PsiFourierOracle::PsiFourierOracle(const AlphaParams& p, double s, double t_max, QuadratureConfig cfg, bool mirrored)
    : t_max_(t_max) {
    cfg.validate();
    require(s >= 0.0 && s < 1.0, "PsiFourierOracle: s must lie in [0, 1)");
    require(t_max > 0.0, "PsiFourierOracle: t_max must be positive");
    const double a = p.alpha;
    const MlParams mp{a, a};
    // long double throughout: where s is close to 1, int |H_s| is O(100) and double rounding alone would exceed 1e-14
    const auto tol = static_cast<ld>(cfg.rel_tol) * 0.1L;
    const ld head = 1.0L / std::tgamma(static_cast<ld>(a));
    auto transform = [&](ld th) {
        const Cx<ld> z(0.0L, th);
        const Cx<ld> den = ml_eval_ld(mp, z, tol).value;
        const Cx<ld> num = s == 0.0 ? Cx<ld>(head, 0.0L) : ml_eval_ld(mp, z * static_cast<ld>(s), tol).value;
        const Cx<ld> h = num / den;
        return cld(h.re, h.im);
    };
    const double kappa = p.lambda * (1.0 - std::pow(s, 1.0 / a));
    const double width = std::min(4.0, 8.0 / t_max);
    const Rule& rule = gauss_rule<20>();
    double lo = 0.0;
    for (int panel = 0;; ++panel) {
        if (panel >= cfg.max_panels) throw NumericalError("fourier_invert_psi: max_panels reached before the tail decayed");
        const double hi = lo + width;
        double biggest = 0.0;
        for (std::size_t i = 0; i < rule.x.size(); ++i) {
            const ld th = 0.5L * (lo + hi) + 0.5L * width * rule.x[i];
            const cld h = transform(-th);
            theta_.push_back(th);
            weight_.push_back(0.5L * width * rule.w[i]);
            lower_.push_back(h);
            if (mirrored) upper_.push_back(transform(th));
            biggest = std::max(biggest, static_cast<double>(std::abs(h)));
        }
        lo = hi;
        if (cfg.truncation == QuadratureConfig::Truncation::fixed) {
            if (lo >= cfg.fixed_radius) break;
            continue;
        }
        // int_Theta^inf exp(-kappa (theta^{1/a} - Theta^{1/a})) d theta ~ a Theta^{1-1/a} / kappa
        const double tail = biggest * a * std::pow(lo, 1.0 - 1.0 / a) / kappa;
        if (tail < cfg.abs_tol * kPi && kappa * std::pow(lo, 1.0 / a) > 5.0) break;
    }
    theta_max_ = lo;
}

double PsiFourierOracle::density(double t) const {
    require(t > 0.0 && t <= t_max_ * (1.0 + 1e-12), "fourier_invert_psi: t outside (0, t_max]");
    ld sum = 0.0L;
    for (std::size_t i = 0; i < theta_.size(); ++i) {
        const ld ph = theta_[i] * t;
        sum += weight_[i] * (lower_[i].real() * std::cos(ph) + lower_[i].imag() * std::sin(ph));
    }
    return static_cast<double>(sum / std::numbers::pi_v<ld>);
}

std::complex<double> PsiFourierOracle::density_complex(double t) const {
    require(!upper_.empty(), "density_complex: oracle was built without the mirrored half-line");
    require(t > 0.0 && t <= t_max_ * (1.0 + 1e-12), "fourier_invert_psi: t outside (0, t_max]");
    cld sum(0.0L, 0.0L);
    for (std::size_t i = 0; i < theta_.size(); ++i) {
        const cld e = std::polar(1.0L, -theta_[i] * t);
        sum += weight_[i] * (lower_[i] * e + upper_[i] * std::conj(e));
    }
    sum /= 2.0L * std::numbers::pi_v<ld>;
    return {static_cast<double>(sum.real()), static_cast<double>(sum.imag())};
}

double PsiFourierOracle::integral_below(double t0, int m, double shift) const {
    require(t0 > 0.0 && t0 <= t_max_ * (1.0 + 1e-12), "fourier_invert_psi: t0 outside (0, t_max]");
    require(m >= 0, "fourier_invert_psi: moment order must be non-negative");
    ld sum = 0.0L;
    for (std::size_t i = 0; i < theta_.size(); ++i) {
        const cd k = moment_kernel(cd(-shift, -static_cast<double>(theta_[i])), t0, m);
        sum += weight_[i] * (lower_[i] * cld(k.real(), k.imag())).real();
    }
    return static_cast<double>(sum / std::numbers::pi_v<ld>);
}

double fourier_invert_psi(const AlphaParams& p, double s, double t, const QuadratureConfig& cfg) {
    return PsiFourierOracle(p, s, std::max(t, 1.0), cfg).density(t);
}

// ---------------------------------------------------------------------------
// l on the wedge

namespace {

/// W(y) = y^{a-1} E(y^a q), directly.
cd scale_fn(double a, double y, cd q, double rel_tol) {
    const MlValue v = ml_eval({a, a}, std::pow(y, a) * q, rel_tol);
    return std::pow(y, a - 1.0) * v.unscaled();
}

/// W(y) minus its principal part exp(y q^{1/a}) / (a q^{(a-1)/a}).
cd scale_fn_remainder(double a, double y, cd q) {
    return std::pow(y, a - 1.0) * ml_eval_without_principal({a, a}, std::pow(y, a) * q).unscaled();
}

}  // namespace

UpperKernelOracle::UpperKernelOracle(const AlphaParams& p, const IntervalSpec& spec, double t_min, double t_max,
                                     QuadratureConfig cfg)
    : p_(p), spec_(spec), t_min_(t_min), t_max_(t_max) {
    cfg.validate();
    spec.validate();
    require(spec.x.has_value(), "UpperKernelOracle: the interval needs a pre-exit position x");
    Wedge w;
    w.build(p.alpha, t_min, t_max, cfg, [this](cd q) { return transform(q); });
    node_ = std::move(w.node);
    weight_ = std::move(w.weight);
    value_ = std::move(w.value);
}

cd UpperKernelOracle::transform(cd q) const {
    const double a = p_.alpha;
    const double b = spec_.b, c = spec_.c, x = *spec_.x, width = spec_.width();
    if (std::abs(q) * std::pow(width, a) <= 4.0) {
        cd v = scale_fn(a, c, q, 1e-15) * scale_fn(a, b + x, q, 1e-15) / scale_fn(a, width, q, 1e-15);
        if (x > 0.0) v -= scale_fn(a, x, q, 1e-15);
        return v;
    }
    require(std::abs(std::arg(q)) < 0.5 * kPi * a, "UpperKernelOracle::transform: requires |arg q| < alpha pi / 2");
    // Write W(y) = P(y) (1 + eps_y) with P(y) = exp(y w) / (a zf), w = q^{1/a}, zf = q^{(a-1)/a}.
    const cd w = std::pow(q, 1.0 / a);
    const cd zf = std::pow(q, (a - 1.0) / a);
    const cd rc = scale_fn_remainder(a, c, q);
    const cd rbx = scale_fn_remainder(a, b + x, q);
    const cd rw = scale_fn_remainder(a, width, q);
    const cd eps_w = rw * a * zf * std::exp(-width * w);
    if (x <= 0.0) {
        const cd eps_c = rc * a * zf * std::exp(-c * w);
        const cd eps_bx = rbx * a * zf * std::exp(-(b + x) * w);
        return std::exp(x * w) / (a * zf) * (1.0 + eps_c) * (1.0 + eps_bx) / (1.0 + eps_w);
    }
    // P(x) [(1+eps_c)(1+eps_bx) - (1+eps_w)] / (1+eps_w) - R(x), each product formed without overflow
    const cd num = rc * std::exp((x - c) * w) + rbx * std::exp(-b * w) + rc * rbx * a * zf * std::exp(-width * w) -
                   rw * std::exp((x - width) * w);
    return num / (1.0 + eps_w) - scale_fn_remainder(a, x, q);
}

double UpperKernelOracle::density(double t) const {
    require_in_range(t, t_min_, t_max_);
    return wedge_density(node_, weight_, value_, t);
}

double UpperKernelOracle::integral_below(double t0, int m) const {
    require(m >= 0, "UpperKernelOracle: moment order must be non-negative");
    require_in_range(t0, t_min_, t_max_);
    return wedge_integral_below(node_, weight_, value_, t0, m);
}

double fourier_invert_l(const AlphaParams& p, const IntervalSpec& spec, double t, const QuadratureConfig& cfg) {
    return UpperKernelOracle(p, spec, std::min(t, 1e-3), std::max(t, 10.0), cfg).density(t);
}

// ---------------------------------------------------------------------------
// convolution series

cd lower_exit_lt(const AlphaParams& p, const IntervalSpec& spec, cd q) {
    spec.validate();
    const double a = p.alpha;
    const MlValue num = ml_eval({a, a}, std::pow(spec.c, a) * q);
    const MlValue den = ml_eval({a, a}, std::pow(spec.width(), a) * q);
    return std::pow(spec.c / spec.width(), a - 1.0) * ratio(num, den);
}

cd convolution_series_lt(const AlphaParams& p, const IntervalSpec& spec, cd q, int n_terms) {
    spec.validate();
    require(n_terms >= 1, "convolution_series_lt: need at least one term");
    const double b = spec.b, c = spec.c, w = spec.width();
    const cd first = hit_lt(p, -b, q) * (1.0 - hit_lt(p, c, q) * hit_lt(p, -c, q));
    const cd step = hit_lt(p, w, q) * hit_lt(p, -w, q);
    cd sum(0.0, 0.0), term = first;
    for (int n = 0; n < n_terms; ++n) {
        sum += term;
        term *= step;
    }
    return sum;
}

namespace {

/// (f * g)(t_i) on the grid t_i = i h by the trapezoid rule.
std::vector<double> convolve(const std::vector<double>& f, const std::vector<double>& g, double h) {
    const std::size_t n = f.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        long double acc = 0.5L * (f[0] * g[i] + f[i] * g[0]);
        for (std::size_t j = 1; j < i; ++j) acc += static_cast<long double>(f[j]) * g[i - j];
        out[i] = static_cast<double>(acc * h);
    }
    return out;
}

struct GridSeries {
    double value;
    double omitted;
};

GridSeries grid_series(const AlphaParams& p, const IntervalSpec& spec, double t, int n_terms, int points,
                       const Wedge& near, const Wedge& across) {
    const double h = t / points;
    std::vector<double> f(points + 1, 0.0), uc(points + 1, 0.0), uw(points + 1, 0.0);
    for (int i = 1; i <= points; ++i) {
        const double tau = i * h;
        f[i] = hit_density_down(p, spec.b, tau);
        uc[i] = near.density(tau);
        uw[i] = across.density(tau);
    }
    // g_0 = f_{-b} - f_{-b} * u_c, g_{n+1} = g_n * u_{b+c}
    std::vector<double> g = convolve(f, uc, h);
    for (int i = 0; i <= points; ++i) g[i] = f[i] - g[i];
    double sum = 0.0;
    for (int n = 0; n < n_terms; ++n) {
        sum += g[points];
        g = convolve(g, uw, h);
    }
    return {sum, std::abs(g[points])};
}

}  // namespace

ConvolutionValue convolution_series_k(const AlphaParams& p, const IntervalSpec& spec, double t, int n_terms,
                                      int grid_points) {
    spec.validate();
    require(t > 0.0, "convolution_series_k: t must be positive");
    require(n_terms >= 1 && grid_points >= 8, "convolution_series_k: need n_terms >= 1 and grid_points >= 8");
    const QuadratureConfig cfg;
    const double t_min = t / (2.0 * grid_points);
    // u_x = f_x * f_{-x}: transform hit_lt(x) hit_lt(-x), inverted on the wedge.
    auto return_time = [&](double x) {
        Wedge w;
        w.build(p.alpha, t_min, t, cfg, [&](cd q) { return hit_lt(p, x, q) * hit_lt(p, -x, q); });
        return w;
    };
    const Wedge near = return_time(spec.c);
    const Wedge across = return_time(spec.width());
    const GridSeries coarse = grid_series(p, spec, t, n_terms, grid_points, near, across);
    const GridSeries fine = grid_series(p, spec, t, n_terms, 2 * grid_points, near, across);
    ConvolutionValue out;
    out.value = fine.value;
    out.omitted_term = fine.omitted;
    out.grid_change = std::abs(fine.value - coarse.value);
    out.n_terms = n_terms;
    return out;
}

// ---------------------------------------------------------------------------

double brownian_lower_exit_density(double b, double c, double t) {
    require(b > 0.0 && c > 0.0, "brownian_lower_exit_density: b and c must be positive");
    require(t > 0.0, "brownian_lower_exit_density: t must be positive");
    const double w = b + c;
    const double rate = kPi * kPi * t / (w * w);
    long double sum = 0.0L;
    for (int k = 1;; ++k) {
        const double decay = std::exp(-rate * k * k);
        // k decay bounds every later term once k^2 rate exceeds one
        if (k * decay < 1e-18 * std::abs(static_cast<double>(sum)) || decay == 0.0) break;
        sum += (k % 2 == 1 ? 1.0 : -1.0) * k * std::sin(k * kPi * c / w) * decay;
        if (k > 10000000) throw NumericalError("brownian_lower_exit_density: series did not converge");
    }
    return 2.0 * kPi / (w * w) * static_cast<double>(sum);
}

}  // namespace stable_exit
