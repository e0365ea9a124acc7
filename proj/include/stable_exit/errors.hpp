// SPDX-License-Identifier: MIT
/**
 * @file errors.hpp
 * @brief Exception hierarchy shared by all modules.
 *
 * Domain errors mean the caller passed parameters outside a precondition.
 * Numerical errors mean the inputs were fine but a tolerance could not be met.
 * The CLI maps the two families to distinct exit codes.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace stable_exit {

class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when a residue series cannot certify its truncation at the requested time.
class ReliabilityError : public NumericalError {
public:
    ReliabilityError(const std::string& what, double floor)
        : NumericalError(what), floor_(floor) {}
    /// Smallest scaled time at which the series is known to be usable.
    [[nodiscard]] double floor() const noexcept { return floor_; }

private:
    double floor_;
};

inline void require(bool ok, const std::string& what) {
    if (!ok) throw DomainError(what);
}

}  // namespace stable_exit
