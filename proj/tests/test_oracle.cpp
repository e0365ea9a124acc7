// SPDX-License-Identifier: MIT
#include "stable_exit/errors.hpp"
#include "stable_exit/mlf.hpp"
#include "stable_exit/oracle.hpp"

#include "support.hpp"

#include <doctest.h>

#include <numbers>

using namespace stable_exit;
using test_support::rel_diff;
using cd = std::complex<double>;

TEST_CASE("quadrature configuration checks") {
    QuadratureConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.abs_tol = 0.0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
}

TEST_CASE("Fourier inversion of psi_s: mass, mean, and the two half-lines") {
    const AlphaParams p = AlphaParams::make(1.5);
    const double s = 0.3;
    const PsiFourierOracle o(p, s, 6.0, {}, true);
    CHECK(o.node_count() > 100);
    CHECK(o.truncation_radius() > 0.0);
    // psi_s has essentially no mass beyond 6 at alpha = 1.5 (rate rho = 5.08)
    CHECK(std::abs(o.integral_below(6.0) - 1.0) < 1e-9);
    CHECK(std::abs(o.integral_below(6.0, 1) - (1.0 - s) * p.gamma_alpha / p.gamma_2alpha) < 1e-9);
    for (double t : {0.1, 0.5, 2.0}) {
        const cd both = o.density_complex(t);
        CHECK(std::abs(both.imag()) < 1e-12);
        CHECK(std::abs(both.real() - o.density(t)) < 1e-12);
    }
    CHECK_THROWS_AS((void)o.integral_below(7.0), DomainError);
}

TEST_CASE("Fourier inversion: exponentially tilted mass is the transform") {
    const AlphaParams p = AlphaParams::make(1.5);
    const double s = 0.5;
    const PsiFourierOracle o(p, s, 6.0);
    for (double q : {0.5, 2.0}) {
        const double lt = (ml_eval({1.5, 1.5}, s * q).unscaled() / ml_eval({1.5, 1.5}, q).unscaled()).real();
        CHECK(std::abs(o.integral_below(6.0, 0, q) - lt) < 1e-9);
    }
}

TEST_CASE("lower exit transform equals the convolution series in the limit") {
    const AlphaParams p = AlphaParams::make(1.5);
    const IntervalSpec spec{1.0, 1.0, std::nullopt};
    for (cd q : {cd(1.0, 0.0), cd(2.0, 1.0)}) {
        const cd exact = lower_exit_lt(p, spec, q);
        CHECK(std::abs(convolution_series_lt(p, spec, q, 12) - exact) < 1e-13 * std::abs(exact));
        // errors shrink by |F_W F_-W| per term
        const double ratio = std::abs(convolution_series_lt(p, spec, q, 3) - exact) /
                             std::abs(convolution_series_lt(p, spec, q, 2) - exact);
        CHECK(rel_diff(ratio, std::abs(hit_lt(p, 2.0, q) * hit_lt(p, -2.0, q))) < 0.05);
    }
    // at q -> 0+ the transform is the lower exit probability
    CHECK(rel_diff(lower_exit_lt(p, spec, cd(1e-12, 0.0)).real(), std::sqrt(0.5)) < 1e-9);
}

TEST_CASE("wedge inversion of l: mass and the direct transform") {
    const AlphaParams p = AlphaParams::make(1.7);
    for (double x : {-0.5, 0.4}) {
        const IntervalSpec spec{1.0, 1.0, x};
        const UpperKernelOracle o(p, spec, 1e-3, 16.0);
        CHECK(o.density(0.3) > 0.0);
        // the transform at q -> 0 is the mass
        CHECK(rel_diff(o.transform(cd(1e-10, 0.0)).real(), upper_kernel_mass(1.7, spec)) < 1e-8);
        // l decays like exp(-rho t / 2^alpha), so the mass beyond 16 is below 1e-13
        const double mass = o.integral_below(16.0);
        CHECK(std::abs(mass - upper_kernel_mass(1.7, spec)) < 1e-9);
        CHECK_THROWS_AS((void)o.density(20.0), DomainError);  // beyond t_max
    }
}

TEST_CASE("wedge transform matches the direct formula where that is stable") {
    const double a = 1.5;
    const AlphaParams p = AlphaParams::make(a);
    const IntervalSpec spec{1.0, 1.0, 0.3};
    const UpperKernelOracle o(p, spec, 1e-2, 2.0);
    const auto W = [&](double y, cd q) {
        return std::pow(y, a - 1.0) * ml_eval({a, a}, std::pow(y, a) * q).unscaled();
    };
    for (cd q : {cd(0.2, 0.1), cd(-0.1, 0.3)}) {
        const cd direct = W(1.0, q) * W(1.3, q) / W(2.0, q) - W(0.3, q);
        CHECK(std::abs(o.transform(q) - direct) < 1e-12 * std::abs(direct));
    }
}

TEST_CASE("convolution series in time reports an honest bound") {
    const AlphaParams p = AlphaParams::make(1.5);
    const IntervalSpec spec{1.0, 1.0, std::nullopt};
    const ConvolutionValue v4 = convolution_series_k(p, spec, 0.5, 4);
    CHECK(std::abs(v4.value - 0.857805930950141) <= v4.bound() + 1e-14);
    const ConvolutionValue v1 = convolution_series_k(p, spec, 0.5, 1);
    CHECK(v1.n_terms == 1);
    CHECK(v1.omitted_term > v4.omitted_term);
    CHECK(std::abs(v1.value - 0.857805930950141) <= v1.bound());
}

TEST_CASE("Brownian closed form: mass and symmetry") {
    // int_0^inf k dt = c / (b + c)
    double mass = 0.0;
    const double h = 1e-3;
    for (double t = 0.5 * h; t < 20.0; t += h) mass += h * brownian_lower_exit_density(0.5, 1.5, t);
    CHECK(std::abs(mass - 0.75) < 1e-6);
    CHECK(brownian_lower_exit_density(1.0, 1.0, 0.3) == doctest::Approx(0.74325845000293167).epsilon(1e-14));
}
