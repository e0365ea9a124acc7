// SPDX-License-Identifier: MIT
#include "stable_exit/format.hpp"

#include <doctest.h>

#include <clocale>
#include <cmath>
#include <cstdlib>
#include <limits>

using namespace stable_exit;

TEST_CASE("17 significant digits round-trip exactly") {
    for (double v : {0.1, 1.0 / 3.0, 2.7645643789791401e-24, -123456.789, 1e300, 5e-324}) {
        const std::string s = format_real(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
    CHECK(format_real(0.1) == "0.10000000000000001");
    CHECK(format_real(2.0) == "2");
    CHECK(format_real(std::nan("")) == "nan");
    CHECK(format_real(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("the decimal separator ignores the locale") {
    if (std::setlocale(LC_NUMERIC, "de_DE.UTF-8") != nullptr) {
        CHECK(format_real(1.5) == "1.5");
        std::setlocale(LC_NUMERIC, "C");
    }
    CHECK(format_real(1.5) == "1.5");
}

TEST_CASE("JSON writer: ordered keys, full precision, null for non-finite") {
    nlohmann::ordered_json j;
    j["b"] = 0.1;
    j["a"] = {1, 2.5, "x"};
    j["nan"] = std::nan("");
    j["empty"] = nlohmann::ordered_json::array();
    CHECK(dump_json(j, 0) == R"({"b":0.10000000000000001,"a":[1,2.5,"x"],"nan":null,"empty":[]})");
    CHECK(dump_json(j).find("\n  \"a\": [\n    1,") != std::string::npos);
}
