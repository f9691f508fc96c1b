#include <iostream>

#include "dgmo_cli/commands.hpp"

int main(int argc, char** argv) { return dgmo::cli::run_cli(argc, argv, std::cout, std::cerr); }
