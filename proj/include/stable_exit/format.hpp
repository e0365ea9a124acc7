// SPDX-License-Identifier: MIT
/**
 * @file format.hpp
 * @brief Locale-independent number formatting shared by every emitted file.
 *
 * Reals are written with 17 significant digits, so that a value read back is
 * bit-identical to the one computed; non-finite values become null in JSON and
 * "nan"/"inf" in CSV.
 */
#pragma once

#include <json.hpp>

#include <string>

namespace stable_exit {

/// 17 significant digits, '.' as decimal separator.
std::string format_real(double v);

/// nlohmann::ordered_json serialization with format_real for every floating-point number.
std::string dump_json(const nlohmann::ordered_json& j, int indent = 2);

}  // namespace stable_exit
