// SPDX-License-Identifier: MIT
#include <iostream>

#include "cellcount/cli.hpp"

int main(int argc, char** argv) { return cellcount::run_cli(argc, argv, std::cout, std::cerr); }
