#include <iostream>

#include "provkernel/cli.hpp"

int main(int argc, char** argv) { return provkernel::cli::run_cli(argc, argv, std::cout, std::cerr); }
