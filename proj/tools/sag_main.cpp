#include "sag/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return sag::run_cli(argc, argv, std::cout, std::cerr); }
