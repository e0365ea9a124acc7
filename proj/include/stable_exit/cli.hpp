// SPDX-License-Identifier: MIT
/**
 * @file cli.hpp
 * @brief The `stable-exit` command line: parsing, validation and output.
 *
 * Exit codes: 0 success, 2 invalid parameters or usage, 3 numerical failure
 * (a time below the reliability floor, or a failed acceptance criterion), 1 I/O.
 * Failures print one JSON object on the error stream.
 */
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stable_exit {

enum class Command { ml, roots, lower, upper, undershoot, simulate, validate };
enum class OutputFormat { csv, json };

/// "start:stop:count" (inclusive, linear) or "log:start:stop:count"; a bare number is one point.
struct GridSpec {
    double start = 0.0;
    double stop = 0.0;
    int count = 1;
    bool logarithmic = false;

    /// Throws DomainError on malformed text.
    static GridSpec parse(std::string_view text);
    [[nodiscard]] std::vector<double> points() const;
};

struct RunConfig {
    Command command = Command::lower;
    OutputFormat format = OutputFormat::csv;
    std::string out;  ///< empty = standard output

    // interval and process
    double alpha = 1.5;
    double b = 1.0;
    double c = 1.0;
    std::optional<double> x;
    std::string grid;  ///< t grid for lower/upper, x grid for undershoot

    // ml
    double ml_a = 1.0, ml_b = 1.0, z_re = 0.0, z_im = 0.0, rel_tol = 1e-13;

    // roots
    int pairs = 200;

    // simulate
    std::uint64_t paths = 10000;
    double dt = 1e-3;
    std::uint64_t seed = 1;
    int workers = 0;
    double t_max = 0.0;
    std::string samples;  ///< CSV of individual exits
    int bias_levels = 0;  ///< > 0 adds a step-size study with that many levels
    std::string bias_out;

    // validate
    bool quick = false;
    std::vector<int> only;

    /// Every parameter-domain check, run before any computation; throws DomainError.
    void validate() const;
};

/// Parses argv into a RunConfig and executes it. Never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace stable_exit
