#include <iostream>

#include "fluxmem/cli.hpp"

int main(int argc, char** argv) { return fluxmem::cli::run(argc, argv, std::cout, std::cerr); }
