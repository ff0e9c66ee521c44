#include <iostream>

#include "rumax_cli/cli.hpp"

int main(int argc, char** argv) { return rumax::cli::run(argc, argv, std::cout, std::cerr); }
