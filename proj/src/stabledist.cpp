// SPDX-License-Identifier: MIT
#include "stable_exit/stabledist.hpp"

#include "stable_exit/errors.hpp"
#include "stable_exit/mlf.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <limits>

namespace stable_exit {
namespace {

using cd = std::complex<double>;
using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

constexpr double kAbsTol = 1e-10;
constexpr double kRelTol = 1e-8;
constexpr unsigned kMaxDepth = 18;

/**
 * Double-exponential quadrature for integrands whose peak has been placed at an endpoint.
 * `abs_floor` is the absolute error accepted regardless of the L1 norm.
 * `f(x, da, db)` receives the exact distances from x to a and to b, so that factors
 * vanishing at an endpoint can be formed without cancellation.
 */
template <class F>
double integrate_peaked(F f, double a, double b, const char* who, double abs_floor) {
    thread_local boost::math::quadrature::tanh_sinh<double> ts(12);
    auto g = [&](double x, double xc) {
        return xc < 0.0 ? f(x, -xc, b - x) : f(x, x - a, xc);
    };
    double err = 0.0, l1 = 0.0;
    double v = ts.integrate(g, a, b, 1e-13, &err, &l1);
    if (!std::isfinite(v) || err > std::max(abs_floor, 1e-10 * l1))
        throw NumericalError(std::string(who) + ": quadrature did not converge (error estimate " +
                             std::to_string(err) + ")");
    return v;
}

/// Adaptive Gauss-Kronrod; throws NumericalError when the estimated error misses both tolerances.
template <class F>
double integrate(F f, double a, double b, const char* who, double rel = 1e-12) {
    double err = 0.0;
    double v = GK::integrate(f, a, b, kMaxDepth, rel, &err);
    if (!std::isfinite(v) || err > std::max(kAbsTol, kRelTol * std::abs(v)))
        throw NumericalError(std::string(who) + ": quadrature did not converge (error estimate " +
                             std::to_string(err) + ")");
    return v;
}

// Below this |y| the power series for g_1 loses at most a few digits.
double series_radius(double alpha) { return alpha >= 1.5 ? 1.5 : 1.0; }

/// g_1(y) = (1/(pi alpha)) sum_k y^k / k! Gamma((k+1)/alpha) sin(pi (k+1)/alpha)
double g1_series(double alpha, double y) {
    long double sum = 0.0L, comp = 0.0L;
    long double powk = 1.0L, fact = 1.0L;
    const long double pi = 3.141592653589793238462643383279502884L;
    for (int k = 0; k < 400; ++k) {
        if (k > 0) {
            powk *= y;
            fact *= k;
        }
        const long double s = (k + 1) / static_cast<long double>(alpha);
        const long double mag = powk / fact * std::tgamma(s);
        const long double term = mag * std::sin(pi * s);
        long double t = sum + term;
        comp += std::fabs(sum) >= std::fabs(term) ? (sum - t) + term : (term - t) + sum;
        sum = t;
        if (k > 8 && std::fabs(mag) < 1e-19L * std::fabs(sum)) break;
    }
    return static_cast<double>((sum + comp) / (pi * alpha));
}

/**
 * Single-integral form for one-sided skewed laws. `theta0` is the skewness angle
 * of the side being evaluated and `y > 0` the distance into that side.
 * Integrates V(th) exp(-y^{alpha/(alpha-1)} V(th)) over (-theta0, pi/2), split at the peak.
 */
double g1_integral(double alpha, double theta0, double y) {
    const double am1 = alpha - 1.0;
    const double lo = -theta0, hi = 0.5 * M_PI;
    const double width = hi - lo;
    const double log_c0 = std::log(std::cos(alpha * theta0)) / am1;
    // With theta0 = +-(pi/alpha - pi/2) the phase offsets below are exactly 0 on the light side.
    const bool light_side = theta0 > 0.0;
    const double wrap = light_side ? 0.0 : alpha * width - M_PI;
    const double kappa = light_side ? 0.0 : (2.0 - alpha) * M_PI;
    // dlo = th - lo and dhi = hi - th: cos th = sin dhi, sin(alpha (theta0 + th)) = sin(alpha dlo),
    // cos(alpha theta0 + (alpha - 1) th) = sin(kappa + (alpha - 1) dhi).
    auto log_v = [&](double, double dlo, double dhi) {
        const double ad = alpha * dlo;
        const double s_ad = ad <= 0.5 * M_PI ? std::sin(ad) : std::sin(alpha * dhi - wrap);
        const double cos_th = std::sin(dhi);
        return log_c0 + alpha / am1 * std::log(cos_th / s_ad) + std::log(std::sin(kappa + am1 * dhi) / cos_th);
    };
    auto log_v1 = [&](double th) { return log_v(th, th - lo, hi - th); };
    const double log_scale = alpha / am1 * std::log(y);
    const double ea = log_v(lo, 0.0, width) + log_scale;
    const double eb = log_v(hi, width, 0.0) + log_scale;
    // V is monotone. On the heavy side it sweeps (0, inf) and the integrand peaks where
    // y^{..} V = 1; on the light side it stays above a minimum reached at an endpoint,
    // and exp(-y^{..} V_min) is factored out.
    double floor_e = -std::numeric_limits<double>::infinity();
    if (std::isfinite(ea) && !(eb < ea)) floor_e = ea;
    if (std::isfinite(eb) && !(ea < eb)) floor_e = eb;
    const bool light = std::isfinite(floor_e) && floor_e > 0.0;
    const double shift = light ? std::exp(floor_e) : 0.0;
    if (shift > 800.0) return 0.0;  // below the smallest double
    auto integrand = [&](double th, double dlo, double dhi) {
        double lv = log_v(th, dlo, dhi);
        if (!std::isfinite(lv)) return 0.0;
        double e = lv + log_scale;
        if (e > 700.0) return 0.0;
        return std::exp(lv - (std::exp(e) - shift));
    };
    double split = 0.5 * (lo + hi);
    if (light) {
        split = ea < eb ? lo + 1e-3 * width : hi - 1e-3 * width;
    } else {
        const double a = lo + 1e-9 * width, b = hi - 1e-9 * width;
        const double fa = log_v1(a) + log_scale, fb = log_v1(b) + log_scale;
        if (std::isfinite(fa) && std::isfinite(fb) && fa * fb < 0.0) {
            boost::uintmax_t iters = 200;
            auto r = boost::math::tools::toms748_solve([&](double th) { return log_v1(th) + log_scale; }, a, b, fa,
                                                       fb, boost::math::tools::eps_tolerance<double>(40), iters);
            split = 0.5 * (r.first + r.second);
        }
    }
    auto left = [&](double th, double da, double db) { return integrand(th, da, (hi - split) + db); };
    auto right = [&](double th, double da, double db) { return integrand(th, (split - lo) + da, db); };
    const double pre = alpha * std::pow(y, 1.0 / am1) / (M_PI * am1) * (light ? std::exp(-shift) : 1.0);
    const double floor = 1e-3 * kAbsTol / pre;
    const double sum = integrate_peaked(left, lo, split, "stable_density_g", floor) +
                       integrate_peaked(right, split, hi, "stable_density_g", floor);
    return pre * sum;
}

double g1(const AlphaParams& p, double y) {
    const double alpha = p.alpha;
    if (alpha == 2.0) return std::exp(-0.25 * y * y) / std::sqrt(4.0 * M_PI);
    if (std::abs(y) <= series_radius(alpha)) return g1_series(alpha, y);
    // Far in the heavy tail the density is the Levy density up to a relative O(y^{-alpha}).
    if (y > 1e8) return p.levy_const * std::pow(y, -alpha - 1.0);
    if (y < -1e8) return 0.0;
    // Standard variable Z = X_1 / scale; the right side carries the heavy tail.
    const double theta0 = 0.5 * M_PI - M_PI / alpha;
    const double z = y / p.scale;
    double v = z > 0.0 ? g1_integral(alpha, theta0, z) : g1_integral(alpha, -theta0, -z);
    return v / p.scale;
}

/// Positive stable density with Laplace transform exp(-q^rho), by the negative-power series.
double positive_stable_series(double rho, double t, double& bound) {
    long double sum = 0.0L, comp = 0.0L, big = 0.0L;
    const long double pi = 3.141592653589793238462643383279502884L;
    const long double lt = std::log(static_cast<long double>(t));
    for (int k = 1; k < 2000; ++k) {
        const long double kr = k * static_cast<long double>(rho);
        const long double mag = std::exp(std::lgamma(kr + 1.0L) - std::lgamma(k + 1.0L) - (kr + 1.0L) * lt);
        const long double term = (k % 2 ? 1.0L : -1.0L) * mag * std::sin(pi * kr);
        long double s = sum + term;
        comp += std::fabs(sum) >= std::fabs(term) ? (sum - s) + term : (term - s) + sum;
        sum = s;
        big = std::max(big, mag);
        if (k > 4 && (mag < 1e-19L * std::fabs(sum) || mag == 0.0L)) {
            bound = static_cast<double>(4e-19L * big / pi + mag / pi);
            return static_cast<double>((sum + comp) / pi);
        }
    }
    throw NumericalError("hit_density_down: negative-power series did not converge");
}

/// Integral representation of the same density; accurate where the series cancels (small t).
double positive_stable_integral(double rho, double t) {
    const double om = 1.0 - rho;
    // phi is the angle, dhi = pi - phi so that sin phi stays accurate near pi.
    auto log_shape = [&](double phi, double dhi) {
        const double sin_phi = phi < 0.5 * M_PI ? std::sin(phi) : std::sin(dhi);
        return std::log(std::sin(rho * phi) / sin_phi) / om + std::log(std::sin(om * phi) / std::sin(rho * phi));
    };
    const double log_lam = -rho / om * std::log(t);
    const double log_pre = std::log(rho / om) - std::log(t) / om;
    // log_shape increases from log_shape(0+) to infinity at pi; the integrand peaks where lam * shape = 1.
    const double base = log_lam + std::log(rho) / om + std::log(om / rho);  // log_shape(0+)
    const double shift = base > 0.0 ? std::exp(base) : 0.0;
    if (shift - log_pre > 800.0) return 0.0;  // below the smallest double
    auto integrand = [&](double phi, double dhi) {
        if (phi <= 0.0) return 0.0;
        double ls = log_shape(phi, dhi);
        if (!std::isfinite(ls)) return 0.0;
        double e = log_lam + ls;
        if (e > 700.0) return 0.0;
        double v = log_pre + ls - (std::exp(e) - shift);
        return v < -745.0 ? 0.0 : std::exp(v);
    };
    double split = 1e-3 * M_PI;
    if (base < 0.0) {
        boost::uintmax_t iters = 200;
        auto r = boost::math::tools::toms748_solve(
            [&](double phi) { return log_lam + log_shape(phi, M_PI - phi); }, 1e-12, M_PI - 1e-9,
            boost::math::tools::eps_tolerance<double>(40), iters);
        split = 0.5 * (r.first + r.second);
    }
    auto left = [&](double phi, double, double db) { return integrand(phi, (M_PI - split) + db); };
    auto right = [&](double phi, double, double db) { return integrand(phi, db); };
    const double pre = std::exp(-shift) / M_PI;
    const double floor = 1e-3 * kAbsTol / pre;
    const double sum = integrate_peaked(left, 0.0, split, "hit_density_down", floor) +
                       integrate_peaked(right, split, M_PI, "hit_density_down", floor);
    return pre * sum;
}

double hit_down_unit(const AlphaParams& p, double t) {
    if (p.alpha == 2.0) return std::exp(-0.25 / t) / (2.0 * std::sqrt(M_PI) * std::pow(t, 1.5));
    const double rho = 1.0 / p.alpha;
    if (t >= 1.0) {
        double bound = 0.0;
        double v = positive_stable_series(rho, t, bound);
        if (bound <= 1e-13 * std::abs(v)) return v;
    }
    return positive_stable_integral(rho, t);
}

}  // namespace

AlphaParams AlphaParams::make(double alpha) {
    require(std::isfinite(alpha) && alpha > 1.0 && alpha <= 2.0, "alpha must lie in (1, 2]");
    AlphaParams p;
    p.alpha = alpha;
    p.gamma_alpha = std::tgamma(alpha);
    p.gamma_2alpha = std::tgamma(2.0 * alpha);
    p.gamma_2ma = std::tgamma(2.0 - alpha);
    p.lambda = std::cos(M_PI / (2.0 * alpha));
    p.levy_const = alpha * (alpha - 1.0) / p.gamma_2ma;
    p.scale = std::pow(std::abs(std::cos(0.5 * M_PI * alpha)), 1.0 / alpha);
    // Skewness +1: B = arctan(tan(pi a / 2)) / a and S = (1 + tan^2(pi a / 2))^{1/(2a)}.
    const double tan_pa = std::tan(0.5 * M_PI * alpha);
    p.cms_shift = std::atan(tan_pa) / alpha;
    p.cms_mult = std::pow(1.0 + tan_pa * tan_pa, 0.5 / alpha);
    return p;
}

double stable_density_g(const AlphaParams& p, double t, double x) {
    require(t > 0.0, "stable_density_g: t must be positive");
    const double s = std::pow(t, 1.0 / p.alpha);
    return g1(p, x / s) / s;
}

double hit_density_down(const AlphaParams& p, double x, double t) {
    require(x > 0.0, "hit_density_down: level must be positive");
    require(t > 0.0, "hit_density_down: t must be positive");
    const double sc = std::pow(x, p.alpha);
    return hit_down_unit(p, t / sc) / sc;
}

cd hit_lt(const AlphaParams& p, double x, cd q) {
    const double a = p.alpha;
    require(q != 0.0 && std::abs(std::arg(q)) < 0.5 * M_PI * a, "hit_lt: requires |arg q| < alpha pi / 2");
    const cd root = std::pow(q, 1.0 / a);
    if (x <= 0.0) return std::exp(x * root);
    // The principal exponential of alpha x^{a-1} q^{1-1/a} E_{a,a}(x^a q) is exactly exp(x q^{1/a}).
    const cd z = std::pow(x, a) * q;
    const MlValue rest = ml_eval_without_principal({a, a}, z);
    return -a * std::pow(x, a - 1.0) * std::pow(q, 1.0 - 1.0 / a) * rest.unscaled();
}

double no_passage_density_h(const AlphaParams& p, double x, double c, double t) {
    require(c > 0.0, "no_passage_density_h: barrier must be positive");
    require(x < c, "no_passage_density_h: x must lie below the barrier");
    require(t > 0.0, "no_passage_density_h: t must be positive");
    const double gap = c - x;
    // in the remaining time u = t - s the hitting density peaks near gap^alpha, which can be far below t
    auto integrand = [&](double u) {
        if (u <= 0.0 || u >= t) return 0.0;
        return hit_density_down(p, gap, u) * stable_density_g(p, t - u, c);
    };
    double passage = 0.0, lo = 0.0;
    for (double hi = std::pow(gap, p.alpha); lo < t; hi *= 4.0) {
        hi = std::min(hi, t);
        passage += integrate(integrand, lo, hi, "no_passage_density_h", 1e-9);
        lo = hi;
    }
    const double h = stable_density_g(p, t, x) - passage;
    if (h < -1e-8) throw NumericalError("no_passage_density_h: negative result signals a quadrature failure");
    return std::max(h, 0.0);
}

RngState path_rng(std::uint64_t seed, std::uint64_t path) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
    return RngState(seq);
}

double standard_stable_from(const AlphaParams& p, double angle, double exponential) {
    const double a = p.alpha;
    const double u = a * (angle + p.cms_shift);
    return p.cms_mult * std::sin(u) / std::pow(std::cos(angle), 1.0 / a) *
           std::pow(std::cos(angle - u) / exponential, (1.0 - a) / a);
}

double sample_increment(const AlphaParams& p, double t, RngState& rng) {
    require(t > 0.0, "sample_increment: t must be positive");
    std::uniform_real_distribution<double> uni(-0.5 * M_PI, 0.5 * M_PI);
    std::exponential_distribution<double> ex(1.0);
    double angle = uni(rng);
    while (angle == -0.5 * M_PI) angle = uni(rng);
    const double w = ex(rng);
    return p.scale * std::pow(t, 1.0 / p.alpha) * standard_stable_from(p, angle, w);
}

}  // namespace stable_exit
