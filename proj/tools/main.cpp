#include <iostream>

#include "pvae/cli/cli.hpp"

int main(int argc, char** argv) { return pvae::cli::run(argc, argv, std::cout, std::cerr); }
