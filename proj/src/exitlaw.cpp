// SPDX-License-Identifier: MIT
#include "stable_exit/exitlaw.hpp"

#include "stable_exit/errors.hpp"
#include "stable_exit/mlf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <limits>

namespace stable_exit {
namespace {

using H = hp_real;

/// Appended to refusals so the caller sees which bound failed.
std::string describe(const SeriesValue& v) {
    char buf[160];
    std::snprintf(buf, sizeof buf, " (value %.6g, tail bound %.3g, rounding bound %.3g)", v.value, v.tail_bound,
                  v.rounding_bound);
    return buf;
}

using CH = Cx<H>;

constexpr double kSeriesTol = 1e-9;
constexpr double kSeriesFloor = 1e-12;
constexpr double kTailSafety = 10.0;
constexpr int kCalibrationSlots = 10;


/// Upper bound on |int_{t0}^inf t^m e^{sigma t} dt| / e^{t0 Re sigma} for Re sigma < 0, or |t^m| when pointwise.
double weight_factor(double t0, int m, double sigma_mod, bool integral) {
    if (!integral) return std::pow(t0, m);
    double f = 0.0, perm = 1.0;
    for (int j = 0; j <= m; ++j) {
        if (j > 0) perm *= (m - j + 1);
        f += perm * std::pow(t0, m - j) / std::pow(sigma_mod, j + 1);
    }
    return f;
}

}  // namespace

void IntervalSpec::validate() const {
    require(std::isfinite(b) && b > 0.0, "interval: b must be positive");
    require(std::isfinite(c) && c > 0.0, "interval: c must be positive");
    if (x) require(*x > -b && *x < c, "interval: x must lie strictly inside (-b, c)");
}

double IntervalSpec::s(double alpha) const { return std::pow(c / (b + c), alpha); }

double IntervalSpec::v(double alpha) const {
    require(x.has_value(), "interval: this quantity needs the pre-exit position x");
    return std::pow((b + *x) / (b + c), alpha);
}

double IntervalSpec::relative_position() const {
    require(x.has_value(), "interval: this quantity needs the pre-exit position x");
    return *x / (b + c);
}

std::pair<double, double> exit_side_probability(double alpha, const IntervalSpec& spec) {
    spec.validate();
    const double lower = std::pow(spec.c / spec.width(), alpha - 1.0);
    return {lower, 1.0 - lower};
}

double mu_moment(double alpha, double s, int n) {
    require(alpha > 1.0 && alpha <= 2.0, "mu_moment: alpha must lie in (1, 2]");
    require(s >= 0.0 && s < 1.0, "mu_moment: s must lie in [0, 1)");
    require(n >= 1 && n <= 10, "mu_moment: order must lie in 1..10");
    // H(z) = E(s z) / E(z) = sum h_j z^j, moment n = (-1)^n n! h_n.
    std::vector<long double> num(n + 1), den(n + 1), h(n + 1);
    long double sj = 1.0L;
    for (int j = 0; j <= n; ++j) {
        const long double rg = 1.0L / std::tgamma(static_cast<long double>(alpha) * (j + 1));
        den[j] = rg;
        num[j] = sj * rg;
        sj *= s;
    }
    for (int j = 0; j <= n; ++j) {
        long double acc = num[j];
        for (int i = 0; i < j; ++i) acc -= h[i] * den[j - i];
        h[j] = acc / den[0];
    }
    long double fact = 1.0L;
    for (int j = 2; j <= n; ++j) fact *= j;
    return static_cast<double>((n % 2 ? -1.0L : 1.0L) * fact * h[n]);
}

namespace {

/// W(c) W(b + x) / W(b + c) - W(x_+) for W(y) = y^{alpha-1}. For x > 0 the two terms agree to
/// first order in c - x, so the difference is formed from their ratio.
double scale_combination(double alpha, double b, double c, double x) {
    if (x <= 0.0) return std::pow(c, alpha - 1.0) * std::pow(b + x, alpha - 1.0) / std::pow(b + c, alpha - 1.0);
    const double ratio_m1 = b * (c - x) / (x * (b + c));
    return std::pow(x, alpha - 1.0) * std::expm1((alpha - 1.0) * std::log1p(ratio_m1));
}

}  // namespace

double undershoot_density(double alpha, const IntervalSpec& spec) {
    require(spec.x.has_value(), "undershoot_density: needs x");
    const double b = spec.b, c = spec.c, x = *spec.x;
    require(b > 0.0 && c > 0.0, "undershoot_density: b and c must be positive");
    if (x <= -b || x >= c) return 0.0;
    return std::abs(std::sin(alpha * M_PI)) / M_PI * scale_combination(alpha, b, c, x) / std::pow(c - x, alpha);
}

double undershoot_density_error(double alpha, const IntervalSpec& spec) {
    require(spec.x.has_value(), "undershoot_density_error: needs x");
    const double b = spec.b, c = spec.c, x = *spec.x;
    if (x <= -b || x >= c) return 0.0;
    // both branches of scale_combination are free of cancellation; each operation costs at most a few ulps
    return 16.0 * std::numeric_limits<double>::epsilon() * undershoot_density(alpha, spec);
}

double jump_survival(double alpha, const IntervalSpec& spec, double u) {
    require(spec.x.has_value(), "jump_survival: needs x");
    require(*spec.x < spec.c, "jump_survival: x must lie below c");
    const double gap = spec.c - *spec.x;
    if (u <= gap) return 1.0;
    return std::pow(gap / u, alpha);
}

double upper_kernel_mass(double alpha, const IntervalSpec& spec) {
    spec.validate();
    require(spec.x.has_value(), "upper_kernel_mass: needs x");
    const double b = spec.b, c = spec.c, x = *spec.x;
    return scale_combination(alpha, b, c, x) / std::tgamma(alpha);
}

double tail_rate(const RootTable& roots, const IntervalSpec& spec) {
    spec.validate();
    require(roots.rho > 0.0, "tail_rate: root table has no leading real root");
    return -roots.rho / std::pow(spec.width(), roots.alpha);
}

struct ExitLaw::Coefficients {
    struct Term {
        CH root;
        std::complex<double> root_d;
        CH coef;
        double coef_abs = 0.0;
        double coef_err = 0.0;  ///< absolute error of coef
        int slot = 0;
        bool paired = false;  ///< stands for itself and its conjugate
        bool degenerate = false;
    };
    std::vector<Term> terms;
    std::vector<double> slot_k;  ///< tail constant calibrated from the slots ending at each index
    double power = 0.0;
    double s = 0.0;
    std::optional<double> v;
    mutable std::once_flag floor_once;
    mutable double floor = 0.0;
};

ExitLaw::ExitLaw(AlphaParams params, std::shared_ptr<const RootTable> roots)
    : params_(params), roots_(std::move(roots)) {
    require(roots_ != nullptr, "ExitLaw: root table required");
    require(std::abs(roots_->alpha - params_.alpha) < 1e-15, "ExitLaw: root table built for a different alpha");
    require(roots_->max_index >= kCalibrationSlots + 1, "ExitLaw: root table too short to calibrate the tail");
    slot_radius_.resize(roots_->max_index + 1);
    for (int k = 0; k <= roots_->max_index; ++k) slot_radius_[k] = separating_radius(params_.alpha, k);
}

ExitLaw ExitLaw::with_roots(double alpha, int pairs) {
    return ExitLaw(AlphaParams::make(alpha), std::make_shared<const RootTable>(enumerate_roots(alpha, pairs)));
}

const ExitLaw::Coefficients& ExitLaw::coefficients(double s, std::optional<double> v) const {
    const std::pair<double, double> key{s, v ? *v : -1.0};
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return *it->second;
    }
    auto co = std::make_shared<Coefficients>();
    co->s = s;
    co->v = v;
    const double a = params_.alpha;
    co->power = 3.0 - 1.0 / a;
    const MlParams pe{a, a};
    auto e_at = [&](double scale, const CH& z, H& err) -> CH {
        if (scale == 0.0) {
            err = 0;
            return CH(H(1) / boost::multiprecision::tgamma(H(a)), H(0));
        }
        auto r = ml_eval_hp(pe, z * H(scale));
        err = r.abs_error_bound;
        return r.value;
    };
    for (const Root& r : roots_->roots) {
        if (r.value.imag() < 0.0) continue;
        Coefficients::Term term;
        term.root = r.precise;
        term.root_d = r.value;
        term.paired = r.value.imag() > 0.0;
        term.degenerate = r.near_degenerate;
        const double mod = std::abs(r.value);
        term.slot = static_cast<int>(std::lower_bound(slot_radius_.begin(), slot_radius_.end(), mod) -
                                     slot_radius_.begin());
        if (term.slot > roots_->max_index) continue;
        auto d = ml_derivative_hp(a, r.precise);
        H err_s, err_v(0);
        CH num = e_at(s, r.precise, err_s);
        H num_err = err_s;
        if (v) {
            CH ev = e_at(*v, r.precise, err_v);
            num_err = err_s * cabs(ev) + err_v * cabs(num) + err_s * err_v;
            num = num * ev;
        }
        const H dmod = cabs(d.value);
        term.coef = num / d.value;
        term.coef_abs = static_cast<double>(cabs(term.coef));
        term.coef_err = static_cast<double>(num_err / dmod + cabs(num) * d.abs_error_bound / (dmod * dmod));
        co->terms.push_back(term);
    }
    // K(N) = safety * max over slots N-9..N of |coef| / |root|^power
    const int n_max = roots_->max_index;
    std::vector<double> per_slot(n_max + 1, 0.0);
    for (const auto& t : co->terms)
        per_slot[t.slot] = std::max(per_slot[t.slot], t.coef_abs / std::pow(std::abs(t.root_d), co->power));
    co->slot_k.assign(n_max + 1, std::numeric_limits<double>::infinity());
    for (int n = kCalibrationSlots; n <= n_max; ++n) {
        double k = 0.0;
        for (int j = n - kCalibrationSlots + 1; j <= n; ++j) k = std::max(k, per_slot[j]);
        co->slot_k[n] = kTailSafety * k;
    }
    std::lock_guard<std::mutex> lock(mutex_);
    auto [it, inserted] = cache_.emplace(key, co);
    return *it->second;
}

SeriesValue ExitLaw::sum(const Coefficients& co, double t, int max_index, int m, double shift, bool integral) const {
    const int n_max = roots_->max_index;
    const int limit = max_index <= 0 ? n_max : std::min(max_index, n_max);
    require(limit >= kCalibrationSlots, "residue series: truncation index too small to calibrate the tail");
    require(shift > -roots_->rho, "residue series: transform variable beyond the radius of convergence");
    const H th(t), sh(shift);
    H total(0);
    double rounding = 0.0;
    for (const auto& term : co.terms) {
        if (term.slot > limit) continue;
        if (term.degenerate)
            throw NumericalError("residue series: a retained root is too close to a multiple root for a simple residue");
        const CH sigma = term.root - CH(sh, H(0));
        CH phi;
        if (!integral) {
            phi = cexp(sigma * th);
            if (m > 0) phi = phi * H(std::pow(t, m));
        } else {
            // int_{t0}^inf t^m e^{sigma t} dt = e^{sigma t0} sum_j (-1)^{j+1} m!/(m-j)! t0^{m-j} / sigma^{j+1}
            CH acc;
            const CH inv = CH(H(1), H(0)) / sigma;
            CH invp = inv;
            H perm(1);
            for (int j = 0; j <= m; ++j) {
                if (j > 0) {
                    perm *= H(m - j + 1);
                    invp = invp * inv;
                }
                const H sign = (j % 2 == 0) ? H(-1) : H(1);
                acc = acc + invp * (sign * perm * pow(th, m - j));
            }
            phi = cexp(sigma * th) * acc;
        }
        CH contrib = term.coef * phi;
        const double mult = term.paired ? 2.0 : 1.0;
        total += mult * contrib.re;
        const double phi_abs = static_cast<double>(cabs(phi));
        rounding += mult * (term.coef_err * phi_abs + 1e-40 * term.coef_abs * phi_abs);
    }
    // Tail beyond the retained annuli, along the predicted roots.
    const double k = co.slot_k[limit];
    const double a = params_.alpha;
    double tail = 0.0;
    constexpr int kTailTerms = 1000000;
    for (int n = limit + 1;; ++n) {
        const std::complex<double> z = predicted_root(a, n);
        const std::complex<double> sigma = z - shift;
        const double w = weight_factor(t, m, std::abs(sigma), integral);
        const double term = 2.0 * k * std::pow(std::abs(z), co.power) * std::exp(t * sigma.real()) * w;
        tail += term;
        if (!std::isfinite(tail) || n - limit > kTailTerms) {
            tail = std::numeric_limits<double>::infinity();
            break;
        }
        if (n > limit + 20 && term <= 1e-17 * tail) break;
    }
    SeriesValue out;
    out.value = static_cast<double>(total);
    out.tail_bound = tail;
    out.rounding_bound = rounding + 4.0 * std::numeric_limits<double>::epsilon() * std::abs(out.value);
    out.truncation_index = limit;
    return out;
}

double ExitLaw::floor_of(const Coefficients& co) const {
    std::call_once(co.floor_once, [&] {
        auto ok = [&](double t) {
            SeriesValue v = sum(co, t, 0, 0, 0.0, false);
            return v.error_bound() < kSeriesTol * (std::abs(v.value) + kSeriesFloor);
        };
        double hi = 1.0;
        while (!ok(hi)) {
            hi *= 2.0;
            if (hi > 1e4) {
                co.floor = std::numeric_limits<double>::infinity();
                return;
            }
        }
        double lo = hi / 2.0;
        while (ok(lo)) {
            hi = lo;
            lo /= 2.0;
            if (lo < 1e-8) {
                co.floor = lo;
                return;
            }
        }
        for (int i = 0; i < 30 && hi / lo > 1.0 + 1e-4; ++i) {
            const double mid = std::sqrt(lo * hi);
            (ok(mid) ? hi : lo) = mid;
        }
        co.floor = hi;
    });
    return co.floor;
}

SeriesValue ExitLaw::psi(double s, double t, int max_index) const {
    require(s >= 0.0 && s < 1.0, "psi: s must lie in [0, 1)");
    require(t > 0.0, "psi: t must be positive");
    const auto& co = coefficients(s, std::nullopt);
    SeriesValue v = sum(co, t, max_index, 0, 0.0, false);
    if (!(v.error_bound() < kSeriesTol * (std::abs(v.value) + kSeriesFloor)))
        throw ReliabilityError("psi: scaled time " + std::to_string(t) + " is below the reliability floor" + describe(v),
                               floor_of(co));
    return v;
}

double ExitLaw::reliability_floor(double s) const {
    require(s >= 0.0 && s < 1.0, "reliability_floor: s must lie in [0, 1)");
    return floor_of(coefficients(s, std::nullopt));
}

SeriesValue ExitLaw::psi_integral_above(double s, double t0, int m, double shift) const {
    require(s >= 0.0 && s < 1.0, "psi_integral_above: s must lie in [0, 1)");
    require(t0 > 0.0, "psi_integral_above: t0 must be positive");
    require(m >= 0 && m <= 4, "psi_integral_above: moment order must lie in 0..4");
    const auto& co = coefficients(s, std::nullopt);
    SeriesValue v = sum(co, t0, 0, m, shift, true);
    if (!(v.error_bound() < kSeriesTol * (std::abs(v.value) + kSeriesFloor)))
        throw ReliabilityError("psi_integral_above: t0 is below the reliability floor" + describe(v), floor_of(co));
    return v;
}

SeriesValue ExitLaw::lower_exit_k(const IntervalSpec& spec, double t) const {
    spec.validate();
    require(t > 0.0, "lower_exit_k: t must be positive");
    const double a = params_.alpha;
    const double w = spec.width();
    const double pre = std::pow(spec.c, a - 1.0) / std::pow(w, 2.0 * a - 1.0);
    SeriesValue v = psi(spec.s(a), t / std::pow(w, a));
    v.value *= pre;
    v.tail_bound *= pre;
    v.rounding_bound *= pre;
    return v;
}

namespace {

double upper_prefactor(double a, const IntervalSpec& spec) {
    const double w = spec.width();
    return std::pow(spec.c, a - 1.0) * std::pow(spec.b + *spec.x, a - 1.0) / std::pow(w, a - 1.0) / std::pow(w, a);
}

void scale_value(SeriesValue& v, double f) {
    v.value *= f;
    v.tail_bound *= std::abs(f);
    v.rounding_bound *= std::abs(f);
}

}  // namespace

SeriesValue ExitLaw::upper_kernel_l(const IntervalSpec& spec, double t) const {
    spec.validate();
    require(spec.x.has_value(), "upper_kernel_l: needs x");
    require(t > 0.0, "upper_kernel_l: t must be positive");
    const double a = params_.alpha;
    const double w = std::pow(spec.width(), a);
    const auto& co = coefficients(spec.s(a), spec.v(a));
    SeriesValue v = sum(co, t / w, 0, 0, 0.0, false);
    if (!(v.error_bound() < kSeriesTol * (std::abs(v.value) + kSeriesFloor)))
        throw ReliabilityError("upper_kernel_l: t is below the reliability floor" + describe(v), floor_of(co) * w);
    scale_value(v, upper_prefactor(a, spec));
    return v;
}

double ExitLaw::reliability_floor_l(const IntervalSpec& spec) const {
    spec.validate();
    const double a = params_.alpha;
    return floor_of(coefficients(spec.s(a), spec.v(a))) * std::pow(spec.width(), a);
}

SeriesValue ExitLaw::upper_kernel_integral_above(const IntervalSpec& spec, double t0, int m) const {
    spec.validate();
    require(spec.x.has_value(), "upper_kernel_integral_above: needs x");
    require(t0 > 0.0, "upper_kernel_integral_above: t0 must be positive");
    require(m >= 0 && m <= 4, "upper_kernel_integral_above: moment order must lie in 0..4");
    const double a = params_.alpha;
    const double w = std::pow(spec.width(), a);
    const auto& co = coefficients(spec.s(a), spec.v(a));
    SeriesValue v = sum(co, t0 / w, 0, m, 0.0, true);
    if (!(v.error_bound() < kSeriesTol * (std::abs(v.value) + kSeriesFloor)))
        throw ReliabilityError("upper_kernel_integral_above: t0 is below the reliability floor" + describe(v), floor_of(co) * w);
    scale_value(v, upper_prefactor(a, spec) * std::pow(w, m + 1));
    return v;
}

SeriesValue ExitLaw::upper_time_p(const IntervalSpec& spec, double t) const {
    SeriesValue v = upper_kernel_l(spec, t);
    scale_value(v, 1.0 / upper_kernel_mass(params_.alpha, spec));
    return v;
}

double ExitLaw::joint_upper_density(const IntervalSpec& spec, double t, double u) const {
    require(spec.x.has_value(), "joint_upper_density: needs x");
    const double x = *spec.x;
    if (x <= -spec.b || x >= spec.c || u <= spec.c - x) return 0.0;
    return upper_kernel_l(spec, t).value * params_.levy_const * std::pow(u, -params_.alpha - 1.0);
}

}  // namespace stable_exit
