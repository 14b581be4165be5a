#include <iostream>

#include "erl/cli/commands.hpp"

int main(int argc, char** argv) { return erl::cli::run_cli(argc, argv, std::cout, std::cerr); }
