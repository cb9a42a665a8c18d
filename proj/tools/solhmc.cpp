#include <iostream>

#include "solhmc/cli/commands.hpp"

int main(int argc, char** argv) { return solhmc::cli::run_cli(argc, argv, std::cout, std::cerr); }
