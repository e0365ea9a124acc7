// SPDX-License-Identifier: MIT
#include "stable_exit/errors.hpp"
#include "stable_exit/exitlaw.hpp"
#include "stable_exit/oracle.hpp"

#include "support.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <doctest.h>

#include <thread>

#include <numbers>

using namespace stable_exit;
using test_support::rel_diff;

namespace {

const ExitLaw& law(double alpha) {
    static std::map<double, std::unique_ptr<ExitLaw>> cache;
    auto& slot = cache[alpha];
    if (!slot)
        slot = std::make_unique<ExitLaw>(AlphaParams::make(alpha),
                                         std::make_shared<const RootTable>(enumerate_roots(alpha, 60)));
    return *slot;
}

double integrate(auto f, double a, double b) {
    boost::math::quadrature::tanh_sinh<double> ts;
    return ts.integrate(f, a, b, 1e-12);
}

}  // namespace

TEST_CASE("interval checks and derived parameters") {
    CHECK_THROWS_AS(IntervalSpec({0.0, 1.0, std::nullopt}).validate(), DomainError);
    CHECK_THROWS_AS(IntervalSpec({1.0, 1.0, 1.0}).validate(), DomainError);
    CHECK_THROWS_AS(IntervalSpec({1.0, 1.0, -1.0}).validate(), DomainError);
    const IntervalSpec spec{0.5, 1.5, 0.3};
    CHECK(rel_diff(spec.s(1.5), std::pow(1.5 / 2.0, 1.5)) < 1e-15);
    CHECK(rel_diff(spec.v(1.5), std::pow(0.8 / 2.0, 1.5)) < 1e-15);
    CHECK(rel_diff(spec.relative_position(), 0.15) < 1e-14);
}

TEST_CASE("exit side probabilities") {
    const auto [lo, up] = exit_side_probability(1.5, IntervalSpec{1.0, 1.0, std::nullopt});
    CHECK(rel_diff(lo, std::sqrt(0.5)) < 1e-15);
    CHECK(rel_diff(lo + up, 1.0) < 1e-15);
    CHECK(rel_diff(exit_side_probability(2.0, IntervalSpec{1.0, 3.0, std::nullopt}).first, 0.75) < 1e-15);
}

TEST_CASE("moments by series division against 60-digit Taylor coefficients") {
    struct Case {
        double a, s;
        double m[3];
    };
    for (const Case& c : {Case{1.5, 0.25, {0.33233509704478425512, 0.15166716841690025896, 0.093311658232579300377}},
                          Case{1.3, 0.5, {0.31388335166183073268, 0.14005776693970638336, 0.08945205465816765969}},
                          Case{1.8, 0.0, {0.25057244930492074612, 0.083805937623368449865, 0.036921855633604863986}}}) {
        for (int n = 1; n <= 3; ++n) CHECK(rel_diff(mu_moment(c.a, c.s, n), c.m[n - 1]) < 1e-12);
        const AlphaParams p = AlphaParams::make(c.a);
        CHECK(rel_diff(mu_moment(c.a, c.s, 1), (1.0 - c.s) * p.gamma_alpha / p.gamma_2alpha) < 1e-14);
    }
    CHECK_THROWS_AS(mu_moment(1.5, 1.0, 1), DomainError);
    CHECK_THROWS_AS(mu_moment(1.5, 0.5, 11), DomainError);
}

TEST_CASE("psi_s: unit mass and moments from the term-wise tail integrals") {
    const ExitLaw& l = law(1.5);
    for (double s : {0.0, 0.5}) {
        const double t0 = 1.01 * l.reliability_floor(s);
        const PsiFourierOracle below(l.params(), s, t0);
        for (int m = 0; m <= 2; ++m) {
            const double total = below.integral_below(t0, m) + l.psi_integral_above(s, t0, m).value;
            CHECK(std::abs(total - (m == 0 ? 1.0 : mu_moment(1.5, s, m))) < 1e-10);
        }
    }
}

TEST_CASE("psi_s is positive and certified above its floor, refused below") {
    const ExitLaw& l = law(1.5);
    const double floor = l.reliability_floor(0.25);
    CHECK(floor > 0.0);
    for (double t : {1.01 * floor, 0.1, 1.0, 5.0}) {
        const SeriesValue v = l.psi(0.25, t);
        CHECK(v.value > -v.error_bound());  // near the floor psi itself is below 1e-20
        CHECK(v.error_bound() < 1e-9 * (v.value + 1e-12));
    }
    try {
        (void)l.psi(0.25, 0.3 * floor);
        FAIL("expected ReliabilityError");
    } catch (const ReliabilityError& e) {
        CHECK(e.floor() == doctest::Approx(floor));
    }
}

TEST_CASE("series bounds are honest: a shorter table stays within its own bound") {
    const ExitLaw& l = law(1.5);
    const double t = 0.2;
    const SeriesValue full = l.psi(0.0, t);
    const SeriesValue partial = l.psi(0.0, t, 40);
    CHECK(std::abs(partial.value - full.value) <= partial.error_bound() + full.error_bound());
}

TEST_CASE("tail: decay rate -rho in scaled time") {
    const ExitLaw& l = law(1.3);
    const double rho = l.roots().rho;
    const double r = std::log(l.psi(0.5, 12.0).value / l.psi(0.5, 10.0).value) / 2.0;
    CHECK(rel_diff(r, -rho) < 1e-6);
    CHECK(rel_diff(tail_rate(l.roots(), IntervalSpec{1.0, 1.0, std::nullopt}), -rho / std::pow(2.0, 1.3)) < 1e-15);
}

TEST_CASE("lower_exit_k: scaling, mass and the convolution value at t = 0.5") {
    const ExitLaw& l = law(1.5);
    const IntervalSpec spec{1.0, 1.0, std::nullopt};
    const double unit = std::pow(2.0, 1.5);
    CHECK(rel_diff(l.lower_exit_k(spec, 0.5).value,
                   std::sqrt(0.5) / unit * l.psi(spec.s(1.5), 0.5 / unit).value) < 1e-14);
    // convolution series with four terms, trapezoid grid of 400 and 800 points
    const double conv = 0.857805930950141;
    CHECK(rel_diff(l.lower_exit_k(spec, 0.5).value, conv) < 1e-12);
}

TEST_CASE("upper kernel: mass identity and normalized density") {
    const ExitLaw& l = law(1.5);
    for (double x : {-0.4, 0.3}) {
        const IntervalSpec spec{1.0, 1.0, x};
        const double t0 = std::max(1e-3, 1.01 * l.reliability_floor_l(spec));
        const UpperKernelOracle below(l.params(), spec, t0, t0);
        const double mass = below.integral_below(t0) + l.upper_kernel_integral_above(spec, t0).value;
        CHECK(std::abs(mass - upper_kernel_mass(1.5, spec)) < 1e-10);
        CHECK(rel_diff(l.upper_time_p(spec, 0.3).value * upper_kernel_mass(1.5, spec), l.upper_kernel_l(spec, 0.3).value) <
              1e-14);
    }
}

TEST_CASE("upper kernel mass is the expected occupation before exit") {
    // Gamma(alpha) * mass equals the scale-function combination; check the x = 0 value by hand
    const double a = 1.5;
    const IntervalSpec spec{1.0, 1.0, 0.0};
    const double want = std::pow(1.0, a - 1.0) * std::pow(1.0, a - 1.0) / std::pow(2.0, a - 1.0) / std::tgamma(a);
    CHECK(rel_diff(upper_kernel_mass(a, spec), want) < 1e-15);
}

TEST_CASE("undershoot density integrates to the upper exit probability") {
    for (double a : {1.3, 1.7}) {
        const IntervalSpec base{0.7, 1.2, std::nullopt};
        // u = (c - x)^{2 - a} absorbs the (c - x)^{1 - a} singularity; u = c^{2 - a} is the kink at x = 0
        const double e = 2.0 - a;
        auto in_u = [&](double u) {
            const double gap = std::pow(u, 1.0 / e);
            return undershoot_density(a, IntervalSpec{base.b, base.c, base.c - gap}) * gap / (e * u);
        };
        // below gap g0 the density is d(g0) (gap / g0)^{1 - a} to relative order g0; c - gap would round to c
        const double g0 = 1e-9;
        const double end_piece = undershoot_density(a, IntervalSpec{base.b, base.c, base.c - g0}) * g0 / e;
        const double u0 = std::pow(base.c, e);
        const double mass = end_piece + integrate(in_u, std::pow(g0, e), u0) + integrate(in_u, u0, std::pow(base.width(), e));
        CHECK(std::abs(mass - exit_side_probability(a, base).second) < 1e-10);
    }
    CHECK(undershoot_density(1.5, IntervalSpec{1.0, 1.0, -1.0}) == 0.0);
    CHECK(undershoot_density_error(1.5, IntervalSpec{1.0, 1.0, 0.2}) <
          1e-14 * undershoot_density(1.5, IntervalSpec{1.0, 1.0, 0.2}));
}

TEST_CASE("jump survival is Pareto beyond the gap") {
    const IntervalSpec spec{1.0, 1.0, 0.25};
    CHECK(jump_survival(1.5, spec, 0.5) == 1.0);
    CHECK(rel_diff(jump_survival(1.5, spec, 1.5), std::pow(2.0, -1.5)) < 1e-15);
}

TEST_CASE("joint upper density marginalizes to the undershoot density") {
    const ExitLaw& l = law(1.5);
    const AlphaParams& p = l.params();
    const IntervalSpec spec{1.0, 1.0, -0.3};
    const double gap = spec.c - *spec.x;
    const double u = 1.7;
    CHECK(rel_diff(l.joint_upper_density(spec, 0.4, u),
                   l.upper_kernel_l(spec, 0.4).value * p.levy_const * std::pow(u, -2.5)) < 1e-14);
    CHECK(l.joint_upper_density(spec, 0.4, 0.5 * gap) == 0.0);
    // over t: the kernel mass; over u > gap: levy_const gap^{-alpha} / alpha
    const double t0 = std::max(1e-3, 1.01 * l.reliability_floor_l(spec));
    const UpperKernelOracle below(p, spec, t0, t0);
    const double l_mass = below.integral_below(t0) + l.upper_kernel_integral_above(spec, t0).value;
    CHECK(rel_diff(l_mass * p.levy_const * std::pow(gap, -1.5) / 1.5, undershoot_density(1.5, spec)) < 1e-9);
}

TEST_CASE("Brownian limit: residue series equals the sine series") {
    const ExitLaw l(AlphaParams::make(2.0), std::make_shared<const RootTable>(enumerate_roots(2.0, 40)));
    for (double t : {0.1, 0.3, 1.0})
        CHECK(std::abs(l.lower_exit_k(IntervalSpec{1.0, 1.0, std::nullopt}, t).value -
                       brownian_lower_exit_density(1.0, 1.0, t)) < 1e-12);
    CHECK(std::abs(brownian_lower_exit_density(1.0, 1.0, 0.1) - 0.73224912356849037) < 1e-15);
    CHECK(std::abs(brownian_lower_exit_density(1.0, 1.0, 1.0) - 0.13321133818243178) < 1e-15);
}

TEST_CASE("coefficients are cached and shared safely across threads") {
    const ExitLaw& l = law(1.5);
    const IntervalSpec spec{0.8, 1.1, 0.1};
    std::vector<double> got(8);
    std::vector<std::thread> pool;
    for (int i = 0; i < 8; ++i) pool.emplace_back([&, i] { got[std::size_t(i)] = l.upper_kernel_l(spec, 0.5).value; });
    for (auto& th : pool) th.join();
    for (double v : got) CHECK(v == got[0]);
}
