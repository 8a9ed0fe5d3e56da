#include <iostream>

#include "harqerr_cli/cli.hpp"

int main(int argc, char** argv) { return harqerr::cli::run_cli(argc, argv, std::cout, std::cerr); }
