// SPDX-License-Identifier: MIT
#include "stable_exit/cli.hpp"
#include "stable_exit/errors.hpp"

#include <json.hpp>

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

using namespace stable_exit;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result cli(std::vector<std::string> args) {
    args.insert(args.begin(), "stable-exit");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run(int(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const fs::path kGolden = STABLE_EXIT_GOLDEN_DIR;

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "stable_exit_cli_test";
    fs::create_directories(dir);
    return dir / name;
}

/// Runs `args` with --out into a scratch file and compares it with the golden file byte for byte.
void check_golden(std::vector<std::string> args, const std::string& golden) {
    const fs::path out = scratch(golden);
    args.push_back("--out");
    args.push_back(out.string());
    const Result r = cli(args);
    CAPTURE(r.err);
    REQUIRE(r.code == 0);
    CHECK(slurp(out) == slurp(kGolden / golden));
}

}  // namespace

TEST_CASE("grid syntax") {
    const GridSpec lin = GridSpec::parse("0.5:2:4");
    CHECK(lin.points() == std::vector<double>{0.5, 1.0, 1.5, 2.0});
    const auto lg = GridSpec::parse("log:0.01:1:3").points();
    CHECK(lg[1] == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(lg.back() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(GridSpec::parse("0.25").points() == std::vector<double>{0.25});
    CHECK_THROWS_AS(GridSpec::parse("1:2"), DomainError);
    CHECK_THROWS_AS(GridSpec::parse("log:0:1:3"), DomainError);
    CHECK_THROWS_AS(GridSpec::parse("2:1:3"), DomainError);
    CHECK_THROWS_AS(GridSpec::parse("1:2:0"), DomainError);
    CHECK_THROWS_AS(GridSpec::parse("1,5:2:3"), DomainError);
}

TEST_CASE("golden outputs, one per command") {
    check_golden({"ml", "--a", "1.5", "--b", "1.5", "--re", "-3", "--im", "1"}, "ml.json");
    check_golden({"roots", "--alpha", "1.5", "--n", "12"}, "roots.json");
    check_golden({"lower", "--alpha", "1.5", "--b", "1", "--c", "1", "--t", "0.1:1:4"}, "lower.csv");
    check_golden({"upper", "--alpha", "1.5", "--b", "1", "--c", "1", "--x", "0.2", "--t", "log:0.05:2:4", "--format",
                  "json"},
                 "upper.json");
    check_golden({"undershoot", "--alpha", "1.5", "--b", "1", "--c", "1", "--x", "-0.8:0.8:5"}, "undershoot.csv");
    const fs::path samples = scratch("simulate_samples.csv");
    check_golden({"simulate", "--alpha", "1.5", "--paths", "200", "--seed", "7", "--dt", "0.002", "--samples",
                  samples.string()},
                 "simulate.json");
    CHECK(slurp(samples) == slurp(kGolden / "simulate_samples.csv"));
}

TEST_CASE("validate prints one line per criterion; timings aside it matches the golden file") {
    const Result r = cli({"validate", "--alpha", "1.5", "--quick", "--only", "9"});
    CHECK(r.code == 0);
    const std::regex timing(R"(\([0-9.]+ s\))");
    CHECK(std::regex_replace(r.out, timing, "(t s)") == std::regex_replace(slurp(kGolden / "validate.txt"), timing, "(t s)"));
}

TEST_CASE("output is independent of the worker count") {
    const Result a = cli({"simulate", "--alpha", "1.4", "--paths", "300", "--workers", "1"});
    const Result b = cli({"simulate", "--alpha", "1.4", "--paths", "300", "--workers", "3"});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
}

TEST_CASE("domain errors exit with 2 and a JSON message") {
    for (const auto& args : std::vector<std::vector<std::string>>{
             {"lower", "--alpha", "2.5", "--t", "0.1:1:3"},
             {"lower", "--alpha", "1.0", "--t", "0.1:1:3"},
             {"lower", "--alpha", "1.5", "--b", "-1", "--t", "0.1:1:3"},
             {"lower", "--alpha", "1.5", "--t", "0:1:3"},
             {"upper", "--alpha", "1.5", "--x", "1.5", "--t", "0.1:1:3"},
             {"undershoot", "--alpha", "1.5", "--x", "-2:0:3"},
             {"simulate", "--alpha", "1.5", "--paths", "0"},
             {"validate", "--only", "12"},
             {"ml", "--a", "3", "--b", "1"},
             {"lower", "--alpha", "1.5"},
             {"nonsense"},
         }) {
        const Result r = cli(args);
        CAPTURE(args.front());
        CHECK(r.code == 2);
        const auto j = nlohmann::json::parse(r.err);
        CHECK(j["exit_code"] == 2);
        CHECK(j.contains("message"));
        CHECK(r.out.empty());
    }
}

TEST_CASE("times below the reliability floor exit with 3 and report the floor") {
    const Result r = cli({"lower", "--alpha", "1.5", "--t", "0.001:1:5"});
    CHECK(r.code == 3);
    const auto j = nlohmann::json::parse(r.err);
    CHECK(j["error"] == "reliability");
    CHECK(j["floor"].get<double>() > 0.001);
    CHECK(r.out.empty());
}

TEST_CASE("unwritable output path exits with 1") {
    const Result r = cli({"undershoot", "--alpha", "1.5", "--x", "0:0.5:2", "--out", "/nonexistent/dir/x.csv"});
    CHECK(r.code == 1);
    CHECK(nlohmann::json::parse(r.err)["error"] == "io");
}

TEST_CASE("help exits cleanly") { CHECK(cli({"--help"}).code == 0); }
