// SPDX-License-Identifier: MIT
/**
 * @file acceptance.hpp
 * @brief The acceptance criteria as runnable checks, shared by the test binary
 *        and `stable-exit validate`.
 *
 * Tolerances and runtime limits are constants in acceptance.cpp; the only knobs
 * here choose how much of each grid is run.
 */
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace stable_exit {

enum class Tier {
    quick,  ///< one alpha (the requested one) and reduced grids, about two minutes
    full,   ///< every grid point of every criterion
};

struct AcceptanceOptions {
    Tier tier = Tier::full;
    double alpha = 1.5;  ///< used by the quick tier only
    int workers = 0;     ///< Monte Carlo workers, 0 = hardware concurrency
    std::vector<int> only;  ///< run just these criteria when non-empty
};

enum class Verdict {
    pass,
    fail,
    /// Fails only on a sub-check that is known to be unattainable; the analysis lives in the decisions ledger.
    expected_fail,
};

struct CriterionResult {
    int id = 0;
    std::string title;
    Verdict verdict = Verdict::fail;
    std::string detail;
    double seconds = 0.0;
};

/// Runs the criteria in order, printing one line per criterion to `log` as each finishes.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts, std::ostream& log);

/// "PASS  3  title: detail (12.3 s)"
std::string format_result(const CriterionResult& r);

/// True unless some criterion has Verdict::fail.
bool acceptance_passed(const std::vector<CriterionResult>& results);

}  // namespace stable_exit
