#include <iostream>

#include "cascadeopt/cli.hpp"

int main(int argc, char** argv) { return cascadeopt::run_cli(argc, argv, std::cout, std::cerr); }
