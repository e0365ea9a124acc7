// SPDX-License-Identifier: MIT
// End-to-end checks that cross module boundaries: CLI files against the library,
// the simulator against the exact laws.
#include "stable_exit/cli.hpp"
#include "stable_exit/exitlaw.hpp"
#include "stable_exit/mcsim.hpp"
#include "stable_exit/oracle.hpp"

#include <json.hpp>

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace stable_exit;
namespace fs = std::filesystem;

namespace {

int cli(std::vector<std::string> args) {
    args.insert(args.begin(), "stable-exit");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    return run(int(argv.size()), argv.data(), out, err);
}

std::vector<std::vector<double>> read_csv(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

TEST_CASE("lower-exit CSV integrates to the lower exit probability") {
    const fs::path out = fs::temp_directory_path() / "stable_exit_k.csv";
    REQUIRE(cli({"lower", "--alpha", "1.5", "--b", "1", "--c", "1", "--t", "0.05:5:200", "--out", out.string()}) == 0);
    const auto rows = read_csv(out);
    REQUIRE(rows.size() == 200);
    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        mass += 0.5 * (rows[i + 1][0] - rows[i][0]) * (rows[i][1] + rows[i + 1][1]);
        CHECK(rows[i][2] <= 1e-9 * (rows[i][1] + 1e-12));  // every row carries its bound
    }
    // trapezoid error and the mass beyond t = 5 are both below 1e-3 here
    CHECK(std::abs(mass - std::sqrt(0.5)) < 1e-3);
}

TEST_CASE("roots JSON: rho > 0 and 2 n + n_real entries") {
    const fs::path out = fs::temp_directory_path() / "stable_exit_roots.json";
    REQUIRE(cli({"roots", "--alpha", "1.5", "--n", "200", "--out", out.string()}) == 0);
    std::ifstream in(out);
    const auto j = nlohmann::json::parse(in);
    CHECK(j["rho"].get<double>() > 0.0);
    int real = 0;
    for (const auto& r : j["roots"]) real += r["n"] == 0;
    CHECK(real == j["real_count"].get<int>());
    CHECK(j["roots"].size() == std::size_t(2 * 200 + real));
}

TEST_CASE("simulated lower-exit times have the exact mean") {
    McConfig cfg;
    cfg.paths = 20000;
    cfg.seed = 5;
    const McReport r = simulate_exit(AlphaParams::make(1.5), IntervalSpec{1.0, 1.0, std::nullopt}, cfg);
    const double s = std::pow(0.5, 1.5);
    const double want = mu_moment(1.5, s, 1);
    const Estimate& m = r.mean_scaled_lower_time;
    CHECK(std::abs(m.value - want) < 4.0 * m.std_error + std::abs(r.bias_mean_scaled_lower_time));
}

TEST_CASE("simulated exit times match the upper-exit law on average") {
    // E[tau; upper exit] = int_x undershoot(x) E[T | x] dx with E[T | x] = int t l / int l
    const double a = 1.5;
    const ExitLaw law(AlphaParams::make(a), std::make_shared<const RootTable>(enumerate_roots(a, 60)));
    McConfig cfg;
    cfg.paths = 20000;
    cfg.seed = 6;
    const IntervalSpec base{1.0, 1.0, std::nullopt};
    const McReport r = simulate_exit(law.params(), base, cfg);
    double sum = 0.0, sum_sq = 0.0;
    for (double t : r.upper_times()) sum += t, sum_sq += t * t;
    const double n = double(r.n_upper), mean = sum / n;
    const double se = std::sqrt((sum_sq / n - mean * mean) / n);
    // exact: average of E[T | x] under the normalized undershoot law, by midpoint rule on 40 cells
    double num = 0.0, den = 0.0;
    for (int i = 0; i < 40; ++i) {
        const double x = -1.0 + (i + 0.5) * 2.0 / 40;
        const IntervalSpec spec{1.0, 1.0, x};
        const double t0 = std::max(1e-3, 1.01 * law.reliability_floor_l(spec));
        const UpperKernelOracle below(law.params(), spec, t0, t0);
        const double m0 = below.integral_below(t0, 0) + law.upper_kernel_integral_above(spec, t0, 0).value;
        const double m1 = below.integral_below(t0, 1) + law.upper_kernel_integral_above(spec, t0, 1).value;
        const double w = undershoot_density(a, spec);
        num += w * m1 / m0;
        den += w;
    }
    // midpoint quadrature of the singular weight near c costs about 1e-2 relative
    CHECK(std::abs(mean - num / den) < 4.0 * se + 0.02 * num / den);
}
