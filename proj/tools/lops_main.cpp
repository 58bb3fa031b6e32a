#include <iostream>

#include "lops/cli.hpp"

int main(int argc, char** argv) { return lops::cli::run(argc, argv, std::cout, std::cerr); }
