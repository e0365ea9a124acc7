// SPDX-License-Identifier: MIT
#include "stable_exit/format.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace stable_exit {
namespace {

void write(const nlohmann::ordered_json& j, int indent, int depth, std::ostringstream& out) {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
    const char* nl = indent > 0 ? "\n" : "";
    switch (j.type()) {
        case nlohmann::ordered_json::value_t::object: {
            if (j.empty()) {
                out << "{}";
                return;
            }
            out << '{' << nl;
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out << ',' << nl;
                first = false;
                out << pad << nlohmann::ordered_json(it.key()).dump() << (indent > 0 ? ": " : ":");
                write(it.value(), indent, depth + 1, out);
            }
            out << nl << close_pad << '}';
            return;
        }
        case nlohmann::ordered_json::value_t::array: {
            if (j.empty()) {
                out << "[]";
                return;
            }
            out << '[' << nl;
            bool first = true;
            for (const auto& v : j) {
                if (!first) out << ',' << nl;
                first = false;
                out << pad;
                write(v, indent, depth + 1, out);
            }
            out << nl << close_pad << ']';
            return;
        }
        case nlohmann::ordered_json::value_t::number_float: {
            const double v = j.get<double>();
            out << (std::isfinite(v) ? format_real(v) : "null");
            return;
        }
        default: out << j.dump(); return;
    }
}

}  // namespace

std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::string dump_json(const nlohmann::ordered_json& j, int indent) {
    std::ostringstream out;
    write(j, indent, 0, out);
    return out.str();
}

}  // namespace stable_exit
