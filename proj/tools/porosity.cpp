#include "porosity/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return porosity::run_cli(argc, argv, std::cout, std::cerr); }
