// SPDX-License-Identifier: MIT
#include "stable_exit/roots.hpp"

#include "stable_exit/errors.hpp"
#include "stable_exit/mlf.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>

namespace stable_exit {
namespace {

using cd = std::complex<double>;

constexpr double kNewtonTol = 1e-13;
constexpr int kNewtonMaxIter = 100;
constexpr double kRectFloor = 1e-3;
constexpr double kCountRelTol = 1e-6;
constexpr double kScanStep = 0.05;  // in |z|^{1/alpha}

struct BoundaryRoot {};

void check_alpha(double alpha) {
    require(std::isfinite(alpha) && alpha > 1.0 && alpha <= 2.0, "alpha must lie in (1, 2]");
}

/// The constant C in the leading-order root equation e^w = C w^{-(1+alpha)}, z = w^alpha.
double root_equation_constant(double a) { return a * a * (a - 1.0) / std::tgamma(2.0 - a); }

/// Typical size of E_{a,a} near z away from the origin: algebraic tail plus principal exponential.
double natural_scale(double a, cd z) {
    const double m = std::abs(z);
    const double r = std::pow(m, 1.0 / a);
    const double alg = a * (a - 1.0) * rgamma(2.0 - a) / (m * m);
    const double re_w = r * std::cos(std::arg(z) / a);
    if (re_w > 600.0) return std::numeric_limits<double>::infinity();
    return alg + std::pow(r, 1.0 - a) / a * std::exp(re_w);
}

MlValue eval_e(double a, cd z, double rel_tol) {
    double abs_tol = std::abs(z) > 10.0 ? 1e-13 * natural_scale(a, z) : 0.0;
    if (!std::isfinite(abs_tol)) abs_tol = 0.0;
    return ml_eval({a, a}, z, rel_tol, abs_tol);
}

std::optional<cd> newton(double a, cd z) {
    for (int it = 0; it < kNewtonMaxIter; ++it) {
        MlValue e = eval_e(a, z, 1e-13);
        double abs_tol = std::abs(z) > 10.0 ? 1e-13 * natural_scale(a, z) / std::abs(z) : 0.0;
        if (!std::isfinite(abs_tol)) abs_tol = 0.0;
        MlValue d = ml_derivative(a, z, 1e-13, abs_tol);
        if (d.value == 0.0) return std::nullopt;
        cd step = e.value / d.value * std::exp(e.log_scale - d.log_scale);
        if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) return std::nullopt;
        z -= step;
        if (std::abs(step) < kNewtonTol * (1.0 + std::abs(z))) return z;
    }
    return std::nullopt;
}

Cx<hp_real> polish(double a, cd z0) {
    Cx<hp_real> z = Cx<hp_real>::from(z0);
    const bool real = z0.imag() == 0.0;
    for (int it = 0; it < 30; ++it) {
        auto e = ml_eval_hp({a, a}, z);
        auto d = ml_derivative_hp(a, z);
        Cx<hp_real> step = e.value / d.value;
        if (real) step.im = 0;
        z -= step;
        if (cabs(step) < hp_real(1e-40) * (1 + cabs(z))) break;
    }
    return z;
}

/// Deterministic jitter in [-0.05, 0.05] so subdivision lines avoid roots by construction.
double jitter(std::uint64_t& state) {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return (static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5) * 0.1;
}

class Winding {
public:
    explicit Winding(double a) : a_(a) {}

    cd value(cd z) const { return eval_e(a_, z, kCountRelTol).value; }

    /// Total change of arg E along the segment, refined until each step is below pi/4.
    double edge(cd z0, cd z1) const {
        const double est = std::abs(std::pow(z1, 1.0 / a_) - std::pow(z0, 1.0 / a_));
        const int n = 8 + static_cast<int>(std::min(4000.0, std::ceil(4.0 * est)));
        double total = 0.0;
        cd prev_z = z0, prev_e = value(z0);
        for (int i = 1; i <= n; ++i) {
            cd z = z0 + (z1 - z0) * (static_cast<double>(i) / n);
            cd e = value(z);
            total += segment(prev_z, z, prev_e, e, 0);
            prev_z = z;
            prev_e = e;
        }
        return total;
    }

    /// Winding number of E around the rectangle [x0,x1] x [y0,y1].
    int rectangle(double x0, double x1, double y0, double y1) const {
        cd c00(x0, y0), c10(x1, y0), c11(x1, y1), c01(x0, y1);
        double total = edge(c00, c10) + edge(c10, c11) + edge(c11, c01) + edge(c01, c00);
        double turns = total / (2.0 * M_PI);
        if (std::abs(turns - std::round(turns)) > 0.1) throw BoundaryRoot{};
        return static_cast<int>(std::lround(turns));
    }

private:
    double segment(cd z0, cd z1, cd e0, cd e1, int depth) const {
        if (e0 == 0.0 || e1 == 0.0) throw BoundaryRoot{};
        double d = std::arg(e1 / e0);
        if (std::abs(d) < M_PI / 4.0) return d;
        if (depth > 48) throw BoundaryRoot{};
        cd zm = 0.5 * (z0 + z1);
        cd em = value(zm);
        return segment(z0, zm, e0, em, depth + 1) + segment(zm, z1, em, e1, depth + 1);
    }

    double a_;
};

struct Rect {
    double x0, x1, y0, y1;
    [[nodiscard]] double side() const { return std::max(x1 - x0, y1 - y0); }
    [[nodiscard]] bool contains(cd z, double margin) const {
        double mx = margin * (x1 - x0), my = margin * (y1 - y0);
        return z.real() >= x0 - mx && z.real() <= x1 + mx && z.imag() >= y0 - my && z.imag() <= y1 + my;
    }
};

struct Found {
    cd z;
    bool cluster = false;
};

class Subdivider {
public:
    explicit Subdivider(double a) : a_(a), winding_(a) {}

    std::vector<Found> search(Rect box) {
        int count = count_with_retry(box);
        std::vector<Found> out;
        recurse(box, count, out);
        return out;
    }

    int count(Rect r) const { return winding_.rectangle(r.x0, r.x1, r.y0, r.y1); }

private:
    int count_with_retry(Rect& r) {
        for (int attempt = 0; attempt < 8; ++attempt) {
            try {
                return count(r);
            } catch (const BoundaryRoot&) {
                double grow = 1e-3 * r.side() * (attempt + 1);
                r.x0 -= grow;
                r.y0 -= grow * 0.7;
                r.x1 += grow * 0.3;
                r.y1 += grow * 1.1;
            }
        }
        throw NumericalError("root search: zero persistently on a search boundary");
    }

    void recurse(const Rect& r, int n, std::vector<Found>& out) {
        if (n <= 0) return;
        cd centre(0.5 * (r.x0 + r.x1), 0.5 * (r.y0 + r.y1));
        if (n == 1) {
            if (auto z = newton(a_, centre); z && r.contains(*z, 0.01)) {
                out.push_back({*z, false});
                return;
            }
        }
        if (r.side() < kRectFloor) {
            auto z = newton(a_, centre);
            if (!z) throw NumericalError("root search: Newton failed inside a floor-sized rectangle");
            out.push_back({*z, n > 1});
            return;
        }
        for (int attempt = 0; attempt < 8; ++attempt) {
            double xm = r.x0 + (0.5 + jitter(state_)) * (r.x1 - r.x0);
            double ym = r.y0 + (0.5 + jitter(state_)) * (r.y1 - r.y0);
            Rect kids[4] = {{r.x0, xm, r.y0, ym}, {xm, r.x1, r.y0, ym}, {r.x0, xm, ym, r.y1}, {xm, r.x1, ym, r.y1}};
            int counts[4];
            try {
                int total = 0;
                for (int k = 0; k < 4; ++k) total += counts[k] = count(kids[k]);
                if (total != n) continue;
            } catch (const BoundaryRoot&) {
                continue;
            }
            for (int k = 0; k < 4; ++k) recurse(kids[k], counts[k], out);
            return;
        }
        throw NumericalError("root search: could not split a rectangle consistently");
    }

    double a_;
    Winding winding_;
    std::uint64_t state_ = 0x9E3779B97F4A7C15ULL;
};

double circle_count_raw(double a, double radius) {
    const double r = std::pow(radius, 1.0 / a);
    auto g = [&](double phi) {
        cd z = std::polar(radius, phi);
        MlValue hi = ml_eval({a, a - 1.0}, z, 1e-9);
        MlValue lo = ml_eval({a, a}, z, 1e-9);
        cd q = hi.value / lo.value * std::exp(hi.log_scale - lo.log_scale);
        return ((q - (a - 1.0)) / a).real();
    };
    int m = 64 + 3 * static_cast<int>(std::ceil(r));
    std::vector<double> vals(m + 1);
    for (int j = 0; j <= m; ++j) vals[j] = g(M_PI * j / m);
    auto trap = [&]() {
        double s = 0.5 * (vals.front() + vals.back());
        for (int j = 1; j < m; ++j) s += vals[j];
        return s / m;
    };
    double prev = trap();
    while (m < (1 << 21)) {
        std::vector<double> next(2 * m + 1);
        for (int j = 0; j <= m; ++j) next[2 * j] = vals[j];
        for (int j = 0; j < m; ++j) next[2 * j + 1] = g(M_PI * (2 * j + 1) / (2.0 * m));
        vals.swap(next);
        m *= 2;
        double cur = trap();
        if (std::abs(cur - prev) < 0.01 && std::abs(cur - std::round(cur)) < 0.1) return cur;
        prev = cur;
    }
    throw NumericalError("argument-principle count inconclusive at radius " + std::to_string(radius));
}

/// Count inside |z| = radius, nudging the radius when a zero sits too close to the circle.
int circle_count(double a, double& radius) {
    const double base = radius;
    for (int attempt = 0; attempt < 6; ++attempt) {
        try {
            return static_cast<int>(std::lround(circle_count_raw(a, radius)));
        } catch (const NumericalError&) {
            radius = base * (1.0 + 1e-3 * (attempt + 1) * (attempt % 2 ? -1.0 : 1.0));
        }
    }
    throw NumericalError("argument-principle count inconclusive near radius " + std::to_string(base));
}

double real_value(double a, double x) { return eval_e(a, cd(-x, 0.0), 1e-12).value.real(); }

double bisect_real(double a, double u_lo, double u_hi) {
    double lo = std::pow(u_lo, a), hi = std::pow(u_hi, a);
    auto f = [&](double x) { return real_value(a, x); };
    std::uintmax_t iters = 200;
    auto tol = [](double l, double h) { return std::abs(h - l) <= 4e-16 * std::max(std::abs(l), 1.0); };
    auto res = boost::math::tools::toms748_solve(f, lo, hi, tol, iters);
    return 0.5 * (res.first + res.second);
}

/// Magnitudes of the real zeros in (0, x_max), ascending.
std::vector<double> scan_real_axis(double a, double x_max, bool first_only) {
    std::vector<double> out;
    const double u_max = std::pow(x_max, 1.0 / a);
    const double alg_const = a * (a - 1.0) * rgamma(2.0 - a);
    const double damp = std::cos(M_PI / a);
    double u_prev = 0.0, f_prev = rgamma(a);
    for (double u = kScanStep; u < u_max; u += kScanStep) {
        double f = real_value(a, std::pow(u, a));
        if ((f > 0) != (f_prev > 0)) {
            out.push_back(bisect_real(a, u_prev, u));
            if (first_only) return out;
        }
        u_prev = u;
        f_prev = f;
        if (a < 2.0 && u > 5.0) {
            double amp = 2.0 / a * std::pow(u, 1.0 - a) * std::exp(u * damp);
            if (amp < 1e-6 * alg_const * std::pow(u, -2.0 * a)) break;
        }
    }
    return out;
}

struct Assembly {
    double a;
    std::vector<cd> upper;   // complex roots with Im > 0
    std::vector<double> real;
    std::vector<bool> upper_cluster;

    bool known(cd z) const {
        for (cd u : upper)
            if (std::abs(u - z) < 1e-8 * (1.0 + std::abs(z))) return true;
        for (double x : real)
            if (std::abs(cd(-x, 0.0) - z) < 1e-8 * (1.0 + x)) return true;
        return false;
    }
    void add(cd z, bool cluster) {
        if (std::abs(z.imag()) < 1e-10 * std::abs(z)) {
            if (!known(cd(z.real(), 0.0))) real.push_back(-z.real());
            return;
        }
        if (z.imag() < 0) z = std::conj(z);
        if (known(z)) return;
        upper.push_back(z);
        upper_cluster.push_back(cluster);
    }
    int tabulated(double r_in, double r_out) const {
        int n = 0;
        for (cd u : upper) n += (std::abs(u) >= r_in && std::abs(u) < r_out) ? 2 : 0;
        for (double x : real) n += (x >= r_in && x < r_out) ? 1 : 0;
        return n;
    }
};

void add_from_box(Assembly& as, Subdivider& sub, Rect box, double r_in, double r_out) {
    for (const Found& f : sub.search(box)) {
        double m = std::abs(f.z);
        if (m >= r_in && m < r_out) as.add(f.z, f.cluster);
    }
}

RootTable finish(Assembly& as, double radius, int requested, const std::function<int(cd)>& annulus_index) {
    const double a = as.a;
    RootTable t;
    t.alpha = a;
    t.radius = radius;
    std::sort(as.real.begin(), as.real.end());
    std::vector<std::size_t> order(as.upper.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto i, auto j) { return std::abs(as.upper[i]) < std::abs(as.upper[j]); });

    auto make = [&](Cx<hp_real> p, int index, bool cluster) {
        Root r;
        r.precise = p;
        r.value = p.to_std();
        r.index = index;
        r.residual = static_cast<double>(cabs(ml_eval_hp({a, a}, p).value));
        r.derivative_modulus = static_cast<double>(cabs(ml_derivative_hp(a, p).value));
        const double mod = std::abs(r.value);
        r.near_degenerate = cluster || r.derivative_modulus < 1e-8 * std::min(1.0, std::pow(mod, 1.0 / a - 3.0));
        return r;
    };
    std::vector<Root> all;
    for (double x : as.real) all.push_back(make(polish(a, cd(-x, 0.0)), 0, false));
    int n = 0;
    for (std::size_t i : order) {
        n = std::max(n + 1, annulus_index(as.upper[i]));
        Root up = make(polish(a, as.upper[i]), n, as.upper_cluster[i]);
        Root down = up;
        down.value = std::conj(up.value);
        down.precise = conj(up.precise);
        down.index = -n;
        all.push_back(up);
        all.push_back(down);
    }
    std::stable_sort(all.begin(), all.end(), [](const Root& l, const Root& r) {
        double ml = std::abs(l.value), mr = std::abs(r.value);
        if (ml != mr) return ml < mr;
        return l.index > r.index;
    });
    t.roots = std::move(all);
    t.max_index = requested < 0 ? n : requested;
    if (as.real.empty()) throw NumericalError("no real zero found inside the search radius");
    t.rho = static_cast<double>(-polish(a, cd(-as.real.front(), 0.0)).re);
    return t;
}

}  // namespace

int RootTable::real_count() const {
    return static_cast<int>(std::count_if(roots.begin(), roots.end(), [](const Root& r) { return r.index == 0; }));
}

int RootTable::pair_count() const {
    return static_cast<int>(std::count_if(roots.begin(), roots.end(), [](const Root& r) { return r.index > 0; }));
}

const Root& RootTable::pair(int n) const {
    for (const Root& r : roots)
        if (r.index == n) return r;
    throw DomainError("root pair " + std::to_string(n) + " is not tabulated");
}

bool RootTable::any_near_degenerate() const {
    return std::any_of(roots.begin(), roots.end(), [](const Root& r) { return r.near_degenerate; });
}

std::complex<double> predicted_root(double alpha, int n) {
    check_alpha(alpha);
    require(n >= 1, "root index must be positive");
    if (alpha == 2.0) return {-(n * M_PI) * (n * M_PI), 0.0};
    // Fixed point of w = log C + 2 pi i n - (1 + alpha) log w; contracting once |w| > 1 + alpha.
    const double c = std::log(root_equation_constant(alpha));
    const cd target(c, 2.0 * M_PI * n);
    cd w(0.0, 2.0 * M_PI * n);
    for (int it = 0; it < 400; ++it) {
        cd next = target - (1.0 + alpha) * std::log(w);
        bool done = std::abs(next - w) < 1e-15 * std::abs(next);
        w = next;
        if (done) break;
    }
    // Past arg w = pi / alpha the pair has collapsed onto the negative axis.
    if (w.imag() <= 0.0 || std::arg(w) >= M_PI / alpha) return {-std::pow(std::abs(w), alpha), 0.0};
    return std::pow(w, alpha);
}

double separating_radius(double alpha, int n) {
    check_alpha(alpha);
    require(n >= 0, "separating index must be non-negative");
    if (n == 0) return 0.0;
    const double wn = std::pow(std::abs(predicted_root(alpha, n)), 1.0 / alpha);
    const double wm = std::pow(std::abs(predicted_root(alpha, n + 1)), 1.0 / alpha);
    return std::pow(0.5 * (wn + wm), alpha);
}

double largest_real_root(double alpha) {
    check_alpha(alpha);
    const double limit = std::pow(2.0 * M_PI * 1000.0, alpha);
    auto found = scan_real_axis(alpha, limit, true);
    if (found.empty()) throw NumericalError("largest_real_root: no sign change located on the negative axis");
    return static_cast<double>(-polish(alpha, cd(-found.front(), 0.0)).re);
}

int verify_root_count(double alpha, double r_inner, double r_outer) {
    check_alpha(alpha);
    require(r_inner >= 0.0 && r_outer > r_inner, "annulus radii must satisfy 0 <= r_inner < r_outer");
    int outer = static_cast<int>(std::lround(circle_count_raw(alpha, r_outer)));
    int inner = r_inner > 0.0 ? static_cast<int>(std::lround(circle_count_raw(alpha, r_inner))) : 0;
    return outer - inner;
}

RootTable enumerate_roots(double alpha, int n) {
    check_alpha(alpha);
    require(n >= 1, "enumerate_roots: the pair count must be positive");
    const int n_sweep = std::min(n, 2);
    std::vector<double> radii(n + 1);
    for (int k = 0; k <= n; ++k) radii[k] = separating_radius(alpha, k);

    Assembly as{alpha, {}, {}, {}};
    for (double x : scan_real_axis(alpha, radii[n], false)) as.real.push_back(x);

    RootTable table;
    Subdivider sub(alpha);
    // Small roots: whole-plane subdivision of the box around the disk.
    double r_sweep = radii[n_sweep];
    int inside = circle_count(alpha, r_sweep);
    radii[n_sweep] = r_sweep;
    add_from_box(as, sub, {-r_sweep, 1.0, -r_sweep, r_sweep}, 0.0, r_sweep);
    table.annuli.push_back({0.0, r_sweep, inside, as.tabulated(0.0, r_sweep)});

    int prev_count = inside;
    for (int k = n_sweep + 1; k <= n; ++k) {
        double r_in = radii[k - 1];
        double r_out = radii[k];
        int total = circle_count(alpha, r_out);
        radii[k] = r_out;
        int counted = total - prev_count;
        if (alpha < 2.0) {
            if (auto z = newton(alpha, predicted_root(alpha, k))) {
                double m = std::abs(*z);
                if (m >= r_in && m < r_out && !as.known(*z)) as.add(*z, false);
            }
        }
        if (as.tabulated(r_in, r_out) != counted)
            add_from_box(as, sub, {-r_out, 0.0, 1e-7 * r_out, r_out}, r_in, r_out);
        table.annuli.push_back({r_in, r_out, counted, as.tabulated(r_in, r_out)});
        prev_count = total;
    }
    auto annulus_of = [&](cd z) {
        return static_cast<int>(std::upper_bound(radii.begin(), radii.end(), std::abs(z)) - radii.begin());
    };
    RootTable t = finish(as, radii[n], n, annulus_of);
    t.annuli = std::move(table.annuli);
    t.certified_through_index = 0;
    for (std::size_t k = 0; k < t.annuli.size(); ++k) {
        if (t.annuli[k].counted != t.annuli[k].tabulated) break;
        t.certified_through_index = k == 0 ? n_sweep : n_sweep + static_cast<int>(k);
    }
    return t;
}

RootTable enumerate_roots_within(double alpha, double radius) {
    check_alpha(alpha);
    require(radius > 0.0, "enumerate_roots_within: radius must be positive");
    Assembly as{alpha, {}, {}, {}};
    for (double x : scan_real_axis(alpha, radius, false)) as.real.push_back(x);
    double r = radius;
    int counted = circle_count(alpha, r);
    Subdivider sub(alpha);
    add_from_box(as, sub, {-r, 1.0, -r, r}, 0.0, r);
    RootTable t = finish(as, r, -1, [](cd) { return 0; });
    t.annuli.push_back({0.0, r, counted, as.tabulated(0.0, r)});
    t.certified_through_index = counted == t.annuli.back().tabulated ? t.max_index : 0;
    return t;
}

}  // namespace stable_exit

namespace stable_exit {

RootTable enumerate_root_pairs(double alpha, int pairs) {
    require(pairs >= 1, "enumerate_root_pairs: the pair count must be positive");
    RootTable t = enumerate_roots(alpha, pairs);
    // collapsed pairs sit at the smallest indices, so one extension normally suffices
    while (t.pair_count() < pairs) t = enumerate_roots(alpha, t.max_index + pairs - t.pair_count());
    return t;
}

}  // namespace stable_exit
