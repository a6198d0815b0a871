#include <iostream>

#include "desapo_cli/commands.hpp"

int main(int argc, char** argv) { return desapo::cli::cli_main(argc, argv, std::cout, std::cerr); }
