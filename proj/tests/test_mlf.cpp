// SPDX-License-Identifier: MIT
#include "stable_exit/errors.hpp"
#include "stable_exit/mlf.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace stable_exit;
using test_support::rel_diff;
using cd = std::complex<double>;

TEST_CASE("closed forms: exp, cosh, cos, sin(z)/z") {
    for (cd z : {cd(0.3, 0.2), cd(-4.0, 1.0), cd(12.0, -3.0), cd(-30.0, 0.5)}) {
        CHECK(rel_diff(ml_eval({1.0, 1.0}, z).unscaled(), std::exp(z)) < 1e-12);
        CHECK(rel_diff(ml_eval({2.0, 1.0}, -z * z).unscaled(), std::cos(z)) < 1e-11);
        CHECK(rel_diff(ml_eval({2.0, 2.0}, -z * z).unscaled(), std::sin(z) / z) < 1e-11);
    }
}

TEST_CASE("z = 0 returns 1 / Gamma(b) exactly") {
    CHECK(ml_eval({1.5, 1.5}, 0.0).value == cd(rgamma(1.5), 0.0));
    CHECK(ml_eval({1.3, 2.0}, 0.0).value == cd(1.0, 0.0));
}

TEST_CASE("reference values from a 120-digit power series") {
    struct Case {
        double a, b;
        cd z, want;
    };
    const Case cases[] = {
        {1.5, 1.5, {-3, 1}, {0.18114868456724138481, 0.15660355684486818062}},
        {1.5, 1.5, {0, 10}, {-2.9506122097979889371, -1.0925020152739711631}},
        {1.5, 1.5, {-20, 0}, {0.0061985012468613419281, 0.0}},
        {1.2, 1.2, {-50, 0}, {-0.000090374444015489878846, 0.0}},
        {1.8, 1.8, {25, 5}, {44.996075828462285629, 29.084481986727159535}},
        {1.5, 0.5, {-2.5, 0}, {-0.58801970660442070512, 0.0}},
        {0.6, 1.0, {-4, 2}, {0.095089903171438579454, 0.049199693623636578719}},
    };
    for (const Case& c : cases) {
        CAPTURE(c.a);
        CAPTURE(c.z);
        const MlValue v = ml_eval({c.a, c.b}, c.z);
        CHECK(rel_diff(v.unscaled(), c.want) < 1e-12);
        CHECK(std::abs(v.unscaled() - c.want) <= 4.0 * v.abs_error_bound + 1e-15 * std::abs(c.want));
    }
}

TEST_CASE("reported bound covers the deviation from the extended-precision value") {
    const MlParams p{1.5, 1.5};
    for (double r : {2.0, 15.0, 45.0, 120.0}) {
        for (int k = 0; k < 16; ++k) {
            const cd z = std::polar(r, -std::numbers::pi + (k + 0.5) * std::numbers::pi / 8.0);
            const MlValue v = ml_eval(p, z);
            const cd ref = ml_eval_hp(p, Cx<hp_real>::from(z)).value.to_std();
            if (v.scaled()) continue;  // the hp route returns unscaled values only
            CAPTURE(z);
            CHECK(std::abs(v.value - ref) <= v.abs_error_bound + 1e-15 * std::abs(ref));
        }
    }
}

TEST_CASE("large arguments come back scaled instead of overflowing") {
    // exp(z^{2/3}) overflows a double once z exceeds about 1.9e4
    const MlValue v = ml_eval({1.5, 1.5}, cd(1e5, 0.0));
    CHECK(v.scaled());
    CHECK(std::isfinite(v.value.real()));
    // leading behaviour (1/a) z^{(1-b)/a} exp(z^{1/a})
    const double log_expected = std::log(1.0 / 1.5) + (-0.5 / 1.5) * std::log(1e5) + std::pow(1e5, 1.0 / 1.5);
    CHECK(std::abs(std::log(std::abs(v.value)) + v.log_scale - log_expected) < 1e-10);
    CHECK_THROWS_AS((void)v.unscaled(), NumericalError);
}

TEST_CASE("removing the principal exponential leaves the algebraic tail") {
    const MlParams p{1.5, 1.5};
    for (cd z : {cd(30.0, 4.0), cd(8.0, -2.0), cd(0.0, 25.0)}) {
        const cd full = ml_eval(p, z).unscaled();
        const cd principal = (1.0 / 1.5) * std::pow(z, (1.0 - 1.5) / 1.5) * std::exp(std::pow(z, 1.0 / 1.5));
        const MlValue rest = ml_eval_without_principal(p, z);
        CHECK(std::abs(rest.unscaled() - (full - principal)) < 1e-10 * std::abs(full));
    }
    // the remainder decays like -z^{-2} / Gamma(alpha - 2 alpha) for b = alpha
    const MlValue far = ml_eval_without_principal(p, cd(400.0, 0.0));
    CHECK(std::abs(far.unscaled()) < 1e-4);
}

TEST_CASE("derivative matches a central difference") {
    const double a = 1.5;
    for (cd z : {cd(-3.0, 1.0), cd(2.0, 0.5), cd(-15.0, 8.0)}) {
        const double h = 1e-5;
        const cd fd = (ml_eval({a, a}, z + h).unscaled() - ml_eval({a, a}, z - h).unscaled()) / (2.0 * h);
        CHECK(rel_diff(ml_derivative(a, z).unscaled(), fd) < 1e-8);
    }
}

TEST_CASE("asymptotic route refuses small arguments") {
    CHECK_THROWS_AS(ml_asymptotic({1.5, 1.5}, cd(3.0, 0.0), 40.0), DomainError);
    // near the crossover the expansion is only as good as its own bound; further out it is exact
    for (double r : {60.0, 200.0}) {
        const cd z = std::polar(r, 2.8);
        const MlValue asym = ml_asymptotic({1.5, 1.5}, z, 40.0);
        const MlValue ref = ml_eval({1.5, 1.5}, z);
        CHECK(std::abs(asym.unscaled() - ref.unscaled()) <= asym.abs_error_bound + ref.abs_error_bound);
    }
    CHECK(ml_asymptotic({1.5, 1.5}, std::polar(200.0, 2.8), 40.0).abs_error_bound < 1e-9 * 5.7e-6);
}

TEST_CASE("parameter checks") {
    CHECK_THROWS_AS(ml_eval({0.0, 1.0}, 1.0), DomainError);
    CHECK_THROWS_AS(ml_eval({2.5, 1.0}, 1.0), DomainError);
    CHECK_THROWS_AS(ml_eval({1.5, std::nan("")}, 1.0), DomainError);
}

TEST_CASE("rgamma vanishes at the poles") {
    CHECK(rgamma(0.0) == 0.0);
    CHECK(rgamma(-2.0) == 0.0);
    CHECK(rel_diff(rgamma(0.5), 1.0 / std::sqrt(std::numbers::pi)) < 1e-15);
}

TEST_CASE("crossover calibration lands on a usable radius") {
    const double r = calibrate_crossover({1.5, 1.5}, 8, 1e-11);
    CHECK(r >= 10.0);
    CHECK(r < 1e4);
}
