// SPDX-License-Identifier: MIT
#include "stable_exit/errors.hpp"
#include "stable_exit/mlf.hpp"
#include "stable_exit/roots.hpp"

#include "support.hpp"

#include <doctest.h>

#include <numbers>

using namespace stable_exit;
using test_support::rel_diff;

namespace {

const RootTable& table(double alpha) {
    static std::map<double, RootTable> cache;
    auto it = cache.find(alpha);
    if (it == cache.end()) it = cache.emplace(alpha, enumerate_roots(alpha, 40)).first;
    return it->second;
}

}  // namespace

TEST_CASE("leading real root against 80-digit root finding on the series") {
    CHECK(rel_diff(largest_real_root(1.2), 4.5672461166221596164) < 1e-13);
    CHECK(rel_diff(largest_real_root(1.5), 5.075430029543421728) < 1e-13);
    CHECK(rel_diff(largest_real_root(1.8), 7.2403143433456804033) < 1e-13);
    CHECK(rel_diff(table(1.5).rho, 5.075430029543421728) < 1e-13);
}

TEST_CASE("Brownian case: the zeros of sin(sqrt(-z)) / sqrt(-z)") {
    const RootTable t = enumerate_roots(2.0, 20);
    REQUIRE(t.real_count() >= 20);
    for (int k = 1; k <= 20; ++k)
        CHECK(rel_diff(t.roots[std::size_t(k - 1)].value.real(), -k * k * std::numbers::pi * std::numbers::pi) < 1e-13);
}

TEST_CASE("every tabulated root is a zero and the table is ordered") {
    for (double a : {1.2, 1.5, 1.8}) {
        const RootTable& t = table(a);
        CAPTURE(a);
        double prev = 0.0;
        for (const Root& r : t.roots) {
            CHECK(r.residual < 1e-10);
            CHECK(std::abs(ml_eval({a, a}, r.value).unscaled()) < 1e-8 * std::max(1.0, r.derivative_modulus));
            CHECK(std::abs(r.value) >= prev * (1.0 - 1e-14));
            CHECK(std::abs(r.value) < t.radius);
            CHECK_FALSE(r.near_degenerate);
            prev = std::abs(r.value);
        }
    }
}

TEST_CASE("argument-principle counts agree annulus by annulus") {
    for (double a : {1.2, 1.5, 1.8}) {
        const RootTable& t = table(a);
        REQUIRE_FALSE(t.annuli.empty());
        for (const AnnulusCount& c : t.annuli) CHECK(c.counted == c.tabulated);
        CHECK(t.certified_through_index == t.max_index);
    }
}

TEST_CASE("roots come in conjugate pairs, real roots are negative") {
    const RootTable& t = table(1.5);
    int pairs = 0;
    for (std::size_t i = 0; i < t.roots.size(); ++i) {
        const Root& r = t.roots[i];
        if (r.index == 0) {
            CHECK(r.value.real() < 0.0);
            CHECK(r.value.imag() == 0.0);
        } else if (r.index > 0) {
            REQUIRE(i + 1 < t.roots.size());
            CHECK(t.roots[i + 1].index == -r.index);
            CHECK(std::abs(t.roots[i + 1].value - std::conj(r.value)) < 1e-12 * std::abs(r.value));
            ++pairs;
        }
    }
    CHECK(pairs + t.real_count() / 2 >= t.max_index - 1);
    CHECK(t.pair(10).index == 10);
    CHECK_THROWS((void)t.pair(t.max_index + 5));
}

TEST_CASE("large roots approach the predicted ones and the rays arg = +-alpha pi / 2") {
    const RootTable& t = table(1.5);
    for (int n = 20; n <= 40; ++n) {
        const std::complex<double> z = t.pair(n).value;
        CHECK(std::abs(z - predicted_root(1.5, n)) < 1e-3 * std::abs(z));
        CHECK(std::abs(std::abs(z) / std::pow(2.0 * std::numbers::pi * n, 1.5) - 1.0) < 0.05);
        CHECK(std::arg(z) > 1.5 * std::numbers::pi / 2.0);
    }
    // the angular offset shrinks with n
    CHECK(std::arg(t.pair(40).value) < std::arg(t.pair(20).value));
}

TEST_CASE("separating radii interleave the predicted roots") {
    for (int n = 1; n < 30; ++n) {
        CHECK(separating_radius(1.5, n) > std::abs(predicted_root(1.5, n)));
        CHECK(separating_radius(1.5, n) < std::abs(predicted_root(1.5, n + 1)));
    }
}

TEST_CASE("independent counting: disk subdivision and the argument principle") {
    const double r = separating_radius(1.5, 6);
    const RootTable small = enumerate_roots_within(1.5, r);
    const RootTable& big = table(1.5);
    int inside = 0;
    for (const Root& z : big.roots) inside += std::abs(z.value) < r;
    CHECK(int(small.roots.size()) == inside);
    CHECK(verify_root_count(1.5, 0.0, r) == inside);
}

TEST_CASE("domain checks") {
    CHECK_THROWS_AS(enumerate_roots(1.0, 10), DomainError);
    CHECK_THROWS_AS(enumerate_roots(2.5, 10), DomainError);
    CHECK_THROWS_AS(enumerate_roots(1.5, 0), DomainError);
}
