// SPDX-License-Identifier: MIT
// Small helpers shared by the unit tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>

namespace test_support {

inline double rel_diff(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

inline double rel_diff(std::complex<double> got, std::complex<double> want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

}  // namespace test_support
