// SPDX-License-Identifier: MIT
#include "stable_exit/errors.hpp"
#include "stable_exit/mcsim.hpp"

#include <json.hpp>

#include <doctest.h>

#include <cstdlib>
#include <sstream>

using namespace stable_exit;

namespace {

McReport small_run(int workers, std::uint64_t paths = 2000) {
    McConfig cfg;
    cfg.paths = paths;
    cfg.dt = 2e-3;
    cfg.seed = 99;
    cfg.workers = workers;
    return simulate_exit(AlphaParams::make(1.5), IntervalSpec{1.0, 1.0, std::nullopt}, cfg);
}

}  // namespace

TEST_CASE("configuration checks") {
    McConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.paths = 0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = {};
    cfg.dt = -1.0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = {};
    cfg.refine_levels = 1;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    CHECK_THROWS_AS(simulate_exit(AlphaParams::make(2.0), IntervalSpec{1, 1, std::nullopt}, McConfig{}), DomainError);
}

TEST_CASE("reports are bit-identical for any worker count") {
    const McReport one = small_run(1), four = small_run(4);
    CHECK(report_json(one, true) == report_json(four, true));
    REQUIRE(one.records.size() == four.records.size());
    for (std::size_t i = 0; i < one.records.size(); ++i) CHECK(one.records[i].time == four.records[i].time);
}

TEST_CASE("STABLE_EXIT_THREADS overrides the requested worker count") {
    setenv("STABLE_EXIT_THREADS", "3", 1);
    CHECK(resolve_workers(8) == 3);
    setenv("STABLE_EXIT_THREADS", "zero", 1);
    CHECK_THROWS_AS(resolve_workers(1), DomainError);
    unsetenv("STABLE_EXIT_THREADS");
    CHECK(resolve_workers(5) == 5);
    CHECK(resolve_workers(0) >= 1);
}

TEST_CASE("records are consistent with their side") {
    const McReport r = small_run(2);
    CHECK(r.n_lower + r.n_upper + r.n_censored == r.paths);
    for (const ExitRecord& rec : r.records) {
        if (rec.side == ExitSide::upper) {
            CHECK(rec.undershoot > -1.0);
            CHECK(rec.undershoot < 1.0);
            CHECK(rec.undershoot + rec.jump >= 1.0);
        }
        if (rec.side != ExitSide::censored) CHECK(rec.time > 0.0);
    }
    CHECK(r.lower_times().size() == r.n_lower);
    CHECK(r.undershoots().size() == r.n_upper);
    CHECK(r.half_step_records.size() == r.paths);
}

TEST_CASE("lower exit probability within a few standard errors") {
    const McReport r = small_run(0, 20000);
    CHECK(std::abs(r.p_lower_hat.value - std::sqrt(0.5)) < 4.0 * r.p_lower_hat.std_error + std::abs(r.bias_p_lower));
    CHECK_FALSE(r.censoring_warning);
}

TEST_CASE("bias study halves the step at each level") {
    McConfig cfg;
    cfg.paths = 500;
    cfg.dt = 4e-3;
    cfg.refine_levels = 3;
    const auto levels = bias_study(AlphaParams::make(1.5), IntervalSpec{1.0, 1.0, std::nullopt}, cfg);
    REQUIRE(levels.size() == 3);
    CHECK(levels[1].dt == 2e-3);
    CHECK(levels[2].dt == 1e-3);
    CHECK(levels[0].drift_p_lower == 0.0);
    const auto j = nlohmann::json::parse(bias_json(levels));
    CHECK(j.size() == 3);
}

TEST_CASE("JSON and CSV outputs") {
    const McReport r = small_run(1, 300);
    const auto j = nlohmann::json::parse(report_json(r, true));
    CHECK(j["paths"] == 300);
    CHECK(j["lower_times"].size() == r.n_lower);
    std::ostringstream csv;
    write_samples_csv(r, csv);
    const std::string text = csv.str();
    CHECK(text.rfind("path_id,side,time,undershoot,jump\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == std::ptrdiff_t(r.n_lower + r.n_upper + 1));
}

TEST_CASE("Kolmogorov-Smirnov statistics") {
    CHECK(ks_statistic({1.0, 2.0, 3.0}, std::vector<double>{1.0, 2.0, 3.0}) == 0.0);
    CHECK(ks_statistic({1.0, 2.0}, std::vector<double>{3.0, 4.0}) == 1.0);
    // uniform sample against the uniform CDF
    std::vector<double> u;
    for (int i = 0; i < 100; ++i) u.push_back((i + 0.5) / 100.0);
    CHECK(ks_statistic(u, [](double x) { return x; }) == doctest::Approx(0.005));
    CHECK(ks_critical_value(100, 0.01) == doctest::Approx(1.6276 / 10.0).epsilon(1e-3));
    CHECK(ks_critical_value(100, 100, 0.05) == doctest::Approx(1.3581 * std::sqrt(0.02)).epsilon(1e-3));
}

TEST_CASE("chi-square tail") {
    CHECK(chi_square_p_value(0.0, 3) == doctest::Approx(1.0));
    CHECK(chi_square_p_value(11.3449, 3) == doctest::Approx(0.01).epsilon(1e-3));
}

TEST_CASE("undershoot bins partition the upper exits") {
    const McReport r = small_run(1, 5000);
    const auto bins = undershoot_bins(r, 4);
    std::size_t total = 0;
    for (const auto& b : bins) total += b.count;
    CHECK(total == r.n_upper);
    CHECK(bins.front().lo == -1.0);
    CHECK(bins.back().hi == 1.0);
}
