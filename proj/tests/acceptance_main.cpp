// SPDX-License-Identifier: MIT
// Acceptance suite: one line per criterion, exit status 1 on any FAIL.
#include "stable_exit/acceptance.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria for the stable exit library"};
    bool quick = false;
    stable_exit::AcceptanceOptions opts;
    app.add_flag("--quick", quick, "reduced grids at a single alpha");
    app.add_option("--alpha", opts.alpha, "alpha for the quick tier");
    app.add_option("--only", opts.only, "criterion numbers to run");
    app.add_option("--workers", opts.workers, "Monte Carlo workers");
    CLI11_PARSE(app, argc, argv);
    opts.tier = quick ? stable_exit::Tier::quick : stable_exit::Tier::full;
    const auto results = stable_exit::run_acceptance(opts, std::cout);
    const bool ok = stable_exit::acceptance_passed(results);
    std::cout << (ok ? "acceptance: all criteria met" : "acceptance: FAILED") << std::endl;
    return ok ? 0 : 1;
}
