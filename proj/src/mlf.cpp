// SPDX-License-Identifier: MIT
#include "stable_exit/mlf.hpp"

#include "stable_exit/errors.hpp"

#include <boost/math/constants/constants.hpp>

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace stable_exit {
namespace {

using ld = long double;
using boost::math::constants::pi;

constexpr std::size_t kTaylorTerms = 1600;
constexpr std::size_t kAsymptoticTerms = 400;
// Beyond these values of |z|^{1/a} the series route is not attempted.
constexpr double kLongDoubleSeriesLimit = 45.0;
constexpr double kExtendedSeriesLimit = 130.0;
constexpr double kExtendedAsymptoticStart = 30.0;
// Exponents above this are factored out of double results.
constexpr double kScaleThreshold = 600.0;
// Empirical safety factor on the truncation estimate of the expansion.
constexpr double kAsymptoticSafety = 10.0;

hp_real rgamma_hp(const hp_real& x) {
    if (x <= 0 && x == floor(x)) return hp_real(0);
    return 1 / tgamma(x);
}

struct Coefficients {
    std::vector<hp_real> taylor_hp;     // 1/Gamma(a n + b)
    std::vector<ld> taylor_ld;
    std::vector<hp_real> asym_hp;       // 1/Gamma(b - a j), j = 1, 2, ...
    std::vector<ld> asym_ld;
    std::vector<double> envelope_log;   // log(Gamma(a j + 1 - b) / pi), bounds |1/Gamma(b - a j)|
    bool algebraic_vanishes = true;     // every 1/Gamma(b - a j) is zero
};

const Coefficients& coefficients(double a, double b) {
    static std::mutex mutex;
    static std::map<std::pair<double, double>, std::unique_ptr<const Coefficients>> cache;
    std::lock_guard lock(mutex);
    auto key = std::make_pair(a, b);
    if (auto it = cache.find(key); it != cache.end()) return *it->second;

    auto co = std::make_unique<Coefficients>();
    const hp_real ah(a), bh(b);
    co->taylor_hp.reserve(kTaylorTerms);
    for (std::size_t n = 0; n < kTaylorTerms; ++n) {
        co->taylor_hp.push_back(rgamma_hp(ah * n + bh));
        co->taylor_ld.push_back(static_cast<ld>(co->taylor_hp.back()));
    }
    for (std::size_t j = 1; j <= kAsymptoticTerms; ++j) {
        co->asym_hp.push_back(rgamma_hp(bh - ah * j));
        co->asym_ld.push_back(static_cast<ld>(co->asym_hp.back()));
        co->envelope_log.push_back(std::lgamma(a * double(j) + 1.0 - b) - std::log(M_PI));
        if (co->asym_hp.back() != 0) co->algebraic_vanishes = false;
    }
    const auto& ref = *co;
    cache.emplace(key, std::move(co));
    return ref;
}

template <class R> const std::vector<R>& taylor_coeffs(const Coefficients& co);
template <> const std::vector<ld>& taylor_coeffs<ld>(const Coefficients& co) { return co.taylor_ld; }
template <> const std::vector<hp_real>& taylor_coeffs<hp_real>(const Coefficients& co) { return co.taylor_hp; }

template <class R> const std::vector<R>& asym_coeffs(const Coefficients& co);
template <> const std::vector<ld>& asym_coeffs<ld>(const Coefficients& co) { return co.asym_ld; }
template <> const std::vector<hp_real>& asym_coeffs<hp_real>(const Coefficients& co) { return co.asym_hp; }

template <class R> R epsilon() { return std::numeric_limits<R>::epsilon(); }

template <class R>
struct Partial {
    Cx<R> value;
    R err{0};
    R magnitude{0};  // sum of moduli of the summed pieces
    R log_scale{0};
    MlMethod method = MlMethod::taylor;
};

template <class R>
void neumaier_add(R& sum, R& comp, const R& x) {
    using std::abs;
    R t = sum + x;
    if (abs(sum) >= abs(x))
        comp += (sum - t) + x;
    else
        comp += (x - t) + sum;
    sum = t;
}

/// sum_n coef(n) z^n with compensated accumulation and a running rounding estimate.
template <class R, class Coef>
Partial<R> taylor_sum(Coef coef, std::size_t available, const Cx<R>& z) {
    const R eps = epsilon<R>();
    const R stop = eps * R(1e-3);
    Cx<R> p(R(1), R(0));
    R sre(0), sim(0), cre(0), cim(0);
    R total(0), weighted(0), last(0);
    R prev = std::numeric_limits<R>::infinity();
    std::size_t n = 0;
    for (; n < available; ++n) {
        Cx<R> term = p * coef(n);
        neumaier_add(sre, cre, term.re);
        neumaier_add(sim, cim, term.im);
        R t = cabs1(term);
        total += t;
        weighted += R(n + 2) * t;
        if (n > 0 && t <= stop * total && t <= prev) {
            last = t;
            break;
        }
        prev = t;
        p *= z;
    }
    if (n == available) throw NumericalError("Mittag-Leffler series did not converge within the term cap");
    Partial<R> out;
    out.value = Cx<R>(sre + cre, sim + cim);
    out.err = R(4) * eps * weighted + R(2) * last;
    out.magnitude = total;
    out.method = MlMethod::taylor;
    return out;
}

template <class R>
Partial<R> taylor_eval(const Coefficients& co, const Cx<R>& z) {
    const auto& c = taylor_coeffs<R>(co);
    return taylor_sum<R>([&](std::size_t n) -> const R& { return c[n]; }, c.size(), z);
}

template <class R>
Partial<R> taylor_derivative_eval(const Coefficients& co, const Cx<R>& z) {
    const auto& c = taylor_coeffs<R>(co);
    return taylor_sum<R>([&](std::size_t n) { return R(n + 1) * c[n + 1]; }, c.size() - 1, z);
}

/**
 * Exponential branches plus the optimally truncated algebraic series.
 *
 * Branch k carries exp((z e^{2 pi i k})^{1/a}) and is kept while
 * |arg z + 2 pi k| < a pi. Switching a branch on abruptly at that line, and
 * truncating the algebraic series at its smallest term, both leave errors of
 * order exp(-|z|^{1/a}).
 */
template <class R>
Partial<R> asymptotic_eval(const Coefficients& co, double a_d, double b_d, const Cx<R>& z, bool allow_scaling,
                           bool skip_principal = false) {
    using std::cos;
    using std::exp;
    using std::log;
    using std::pow;
    using std::sin;
    const R a(a_d), b(b_d);
    const R eps = epsilon<R>();
    const R twopi = 2 * pi<R>();
    const R mod = cabs(z);
    const R theta = carg(z);
    const R lr = log(mod) / a;
    const R r = exp(lr);

    Cx<R> expo[3];
    int branches = 0;
    for (int k = -1; k <= 1; ++k) {
        R phi = theta + twopi * k;
        using std::abs;
        if (abs(phi) >= a * pi<R>()) continue;
        if (skip_principal && k == 0) continue;
        R ang = phi / a;
        Cx<R> w(r * cos(ang), r * sin(ang));
        Cx<R> lw(lr, ang);
        expo[branches++] = w + lw * (R(1) - b);
    }
    R shift(0);
    if (allow_scaling) {
        R top = -std::numeric_limits<R>::infinity();
        for (int i = 0; i < branches; ++i) top = expo[i].re > top ? expo[i].re : top;
        using std::floor;
        if (top > R(kScaleThreshold)) shift = floor(top);  // integral, so exact in every type
    }
    Cx<R> ex;
    R ex_abs(0);
    for (int i = 0; i < branches; ++i) {
        Cx<R> e = cexp(Cx<R>(expo[i].re - shift, expo[i].im)) / a;
        ex += e;
        ex_abs += cabs1(e);
    }

    const R scale = shift > 0 ? exp(-shift) : R(1);
    Cx<R> alg;
    R alg_abs(0), omitted(0);
    if (!co.algebraic_vanishes) {
        const auto& c = asym_coeffs<R>(co);
        const Cx<R> zi = Cx<R>(R(1), R(0)) / z;
        const double log_mod = static_cast<double>(log(mod));
        Cx<R> q(R(1), R(0));
        double prev_env = std::numeric_limits<double>::infinity();
        bool stopped = false;
        // Truncate where the smooth envelope |z|^{-j} Gamma(a j + 1 - b)/pi turns upward,
        // so that near-vanishing coefficients cannot end the sum early.
        for (std::size_t j = 0; j < c.size(); ++j) {
            q *= zi;
            const double env_log = co.envelope_log[j] - double(j + 1) * log_mod;
            if (env_log > prev_env) {
                omitted = exp(R(env_log));
                stopped = true;
                break;
            }
            prev_env = env_log;
            if (c[j] == 0) continue;
            Cx<R> term = q * c[j];
            R t = cabs1(term);
            if (R(std::exp(env_log)) * scale <= eps * R(1e-3) * (ex_abs + alg_abs * scale)) {
                omitted = exp(R(env_log));
                stopped = true;
                break;
            }
            alg += term;
            alg_abs += t;
        }
        if (!stopped) omitted = exp(R(prev_env));
    }

    Partial<R> out;
    out.value = ex - alg * scale;
    const R stokes = R(2) / a * pow(r, R(1) - b) * exp(-r - shift);
    out.err = R(kAsymptoticSafety) * (omitted * scale + stokes) + eps * (R(8) + R(4) * r) * ex_abs +
              R(4) * eps * alg_abs * scale;
    out.magnitude = ex_abs + alg_abs * scale;
    out.log_scale = shift;
    out.method = MlMethod::asymptotic;
    return out;
}

template <class R>
MlValue narrow(const Partial<R>& p) {
    MlValue v;
    v.value = p.value.to_std();
    v.abs_error_bound = static_cast<double>(p.err) + std::abs(v.value) * std::numeric_limits<double>::epsilon();
    v.method = p.method;
    v.log_scale = static_cast<double>(p.log_scale);
    return v;
}

double radius_root(double a, double modulus) { return std::pow(modulus, 1.0 / a); }

}  // namespace

void MlParams::validate() const {
    require(std::isfinite(a) && a > 0.0 && a <= 2.0, "Mittag-Leffler parameter a must lie in (0, 2]");
    require(std::isfinite(b), "Mittag-Leffler parameter b must be finite");
}

std::complex<double> MlValue::unscaled() const {
    if (log_scale == 0.0) return value;
    if (std::abs(value) == 0.0) return value;
    double m = std::log(std::abs(value)) + log_scale;
    if (m > 700.0) throw NumericalError("Mittag-Leffler value overflows double precision");
    return value * std::exp(log_scale);
}

double rgamma(double x) {
    if (x <= 0.0 && x == std::floor(x)) return 0.0;
    if (x > 170.0) return std::exp(-std::lgamma(x));
    return 1.0 / std::tgamma(x);
}

MlValue ml_eval(MlParams p, std::complex<double> z, double rel_tol, double abs_tol) {
    p.validate();
    if (z == 0.0) return {rgamma(p.b), 0.0, MlMethod::taylor, 0.0};
    const auto& co = coefficients(p.a, p.b);
    const double r = radius_root(p.a, std::abs(z));

    auto good = [&](const MlValue& v) {
        return v.abs_error_bound <= std::max(rel_tol * std::abs(v.value), v.scaled() ? 0.0 : abs_tol);
    };
    MlValue best;
    bool have = false;
    auto consider = [&](const MlValue& v) {
        if (!have || v.abs_error_bound < best.abs_error_bound || (best.scaled() && !v.scaled())) {
            best = v;
            have = true;
        }
    };
    if (r >= 2.0) {
        MlValue v = narrow(asymptotic_eval<ld>(co, p.a, p.b, Cx<ld>::from(z), true));
        if (good(v)) return v;
        consider(v);
    }
    if (r < kLongDoubleSeriesLimit) {
        MlValue v = narrow(taylor_eval<ld>(co, Cx<ld>::from(z)));
        if (good(v)) return v;
        consider(v);
    }
    if (r < kExtendedSeriesLimit) {
        MlValue v = narrow(taylor_eval<hp_real>(co, Cx<hp_real>::from(z)));
        if (good(v)) return v;
        consider(v);
    }
    return best;
}

MlValue ml_eval_without_principal(MlParams p, std::complex<double> z) {
    p.validate();
    require(std::abs(std::arg(z)) < 0.5 * M_PI * p.a, "principal exponential is dominant only for |arg z| < a pi / 2");
    const auto& co = coefficients(p.a, p.b);
    const double r = radius_root(p.a, std::abs(z));
    const double target = 64.0 * std::numeric_limits<double>::epsilon();
    MlValue asym;
    bool have = false;
    if (r >= 2.0) {
        asym = narrow(asymptotic_eval<ld>(co, p.a, p.b, Cx<ld>::from(z), false, true));
        have = true;
        if (asym.abs_error_bound <= target * std::max(std::abs(asym.value), 1e-300)) return asym;
    }
    if (r < kExtendedSeriesLimit - 30.0) {
        using H = hp_real;
        const Cx<H> zh = Cx<H>::from(z);
        Partial<H> t = taylor_eval<H>(co, zh);
        const H a(p.a), b(p.b);
        // (1/a) z^{(1-b)/a} exp(z^{1/a}) on the principal branch
        const Cx<H> lz = clog(zh);
        const Cx<H> w = cexp(lz / a);
        const Cx<H> principal = cexp(w + lz * ((H(1) - b) / a)) / a;
        Partial<H> out = t;
        out.value = t.value - principal;
        out.err = t.err + H(1e-60) * cabs(principal);
        MlValue v = narrow(out);
        if (!have || v.abs_error_bound < asym.abs_error_bound) return v;
    }
    if (!have) throw NumericalError("ml_eval_without_principal: no route reached");
    return asym;
}

MlValue ml_derivative(double a, std::complex<double> z, double rel_tol, double abs_tol) {
    MlParams p{a, a};
    p.validate();
    const auto& co = coefficients(a, a);
    if (std::abs(z) < 1.0) {
        MlValue v = narrow(taylor_derivative_eval<ld>(co, Cx<ld>::from(z)));
        return v;
    }
    MlValue hi = ml_eval({a, a - 1.0}, z, rel_tol, abs_tol);
    MlValue lo = ml_eval({a, a}, z, rel_tol, abs_tol);
    const double top = std::max(hi.log_scale, lo.log_scale);
    const double fh = std::exp(hi.log_scale - top), fl = std::exp(lo.log_scale - top);
    MlValue out;
    const std::complex<double> den = a * z;
    out.value = (hi.value * fh - (a - 1.0) * lo.value * fl) / den;
    out.abs_error_bound = (hi.abs_error_bound * fh + (a - 1.0) * lo.abs_error_bound * fl) / std::abs(den) +
                          4.0 * std::numeric_limits<double>::epsilon() *
                              (std::abs(hi.value) * fh + (a - 1.0) * std::abs(lo.value) * fl) / std::abs(den);
    out.method = hi.method;
    out.log_scale = top;
    return out;
}

MlValue ml_asymptotic(MlParams p, std::complex<double> z, double crossover_radius) {
    p.validate();
    require(std::abs(z) >= crossover_radius, "ml_asymptotic: |z| is below the crossover radius");
    return narrow(asymptotic_eval<ld>(coefficients(p.a, p.b), p.a, p.b, Cx<ld>::from(z), true));
}

MlResult<hp_real> ml_eval_hp(MlParams p, const Cx<hp_real>& z) {
    p.validate();
    if (z.re == 0 && z.im == 0) return {Cx<hp_real>(rgamma_hp(hp_real(p.b)), hp_real(0)), hp_real(0), MlMethod::taylor};
    const auto& co = coefficients(p.a, p.b);
    const double r = radius_root(p.a, static_cast<double>(cabs(z)));
    Partial<hp_real> best;
    bool have = false;
    if (r >= kExtendedAsymptoticStart) {
        best = asymptotic_eval<hp_real>(co, p.a, p.b, z, false);
        have = true;
        if (best.err <= hp_real(1e-30) * best.magnitude || r >= kExtendedSeriesLimit)
            return {best.value, best.err, best.method};
    }
    Partial<hp_real> t = taylor_eval<hp_real>(co, z);
    if (!have || t.err < best.err) best = t;
    return {best.value, best.err, best.method};
}

MlResult<hp_real> ml_derivative_hp(double a, const Cx<hp_real>& z) {
    MlParams p{a, a};
    p.validate();
    const auto& co = coefficients(a, a);
    if (cabs(z) < 1) {
        auto t = taylor_derivative_eval<hp_real>(co, z);
        return {t.value, t.err, t.method};
    }
    auto hi = ml_eval_hp({a, a - 1.0}, z);
    auto lo = ml_eval_hp(p, z);
    const hp_real ah(a);
    const Cx<hp_real> den = z * ah;
    Cx<hp_real> v = (hi.value - lo.value * (ah - 1)) / den;
    hp_real err = (hi.abs_error_bound + (ah - 1) * lo.abs_error_bound) / cabs(den);
    return {v, err, hi.method};
}

MlResult<ld> ml_eval_ld(MlParams p, const Cx<ld>& z, ld rel_tol) {
    p.validate();
    if (z.re == 0 && z.im == 0) return {Cx<ld>(static_cast<ld>(rgamma_hp(hp_real(p.b))), 0), 0, MlMethod::taylor};
    const auto& co = coefficients(p.a, p.b);
    const double r = radius_root(p.a, static_cast<double>(cabs(z)));
    Partial<ld> best;
    bool have = false;
    auto consider = [&](const Partial<ld>& v) {
        if (!have || v.err < best.err) {
            best = v;
            have = true;
        }
    };
    auto good = [&](const Partial<ld>& v) { return v.err <= rel_tol * cabs(v.value); };
    if (r >= 2.0) {
        auto v = asymptotic_eval<ld>(co, p.a, p.b, z, false);
        if (good(v)) return {v.value, v.err, v.method};
        consider(v);
    }
    if (r < kLongDoubleSeriesLimit) {
        auto v = taylor_eval<ld>(co, z);
        if (good(v)) return {v.value, v.err, v.method};
        consider(v);
    }
    if (r < kExtendedSeriesLimit) {
        auto h = taylor_eval<hp_real>(co, Cx<hp_real>::from(z));
        Partial<ld> v;
        v.value = Cx<ld>::from(h.value);
        v.err = static_cast<ld>(h.err) + cabs(v.value) * std::numeric_limits<ld>::epsilon();
        v.method = h.method;
        consider(v);
    }
    return {best.value, best.err, best.method};
}

double calibrate_crossover(MlParams p, int rays, double agreement) {
    p.validate();
    const auto& co = coefficients(p.a, p.b);
    for (double radius = 10.0; radius_root(p.a, radius) < 100.0; radius *= 1.25) {
        bool ok = true;
        for (int j = 0; j < rays && ok; ++j) {
            double th = -M_PI + 2.0 * M_PI * (j + 0.5) / rays;
            Cx<hp_real> zh(hp_real(radius * std::cos(th)), hp_real(radius * std::sin(th)));
            auto ref = taylor_eval<hp_real>(co, zh);
            auto as = asymptotic_eval<hp_real>(co, p.a, p.b, zh, false);
            ok = cabs(as.value - ref.value) <= hp_real(agreement) * cabs(ref.value);
        }
        if (ok) return radius;
    }
    throw NumericalError("crossover calibration did not converge");
}

}  // namespace stable_exit
