// SPDX-License-Identifier: MIT
#include "stable_exit/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return stable_exit::run(argc, argv, std::cout, std::cerr); }
