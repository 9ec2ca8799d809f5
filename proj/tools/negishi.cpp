#include <iostream>

#include "negishi/cli.hpp"

int main(int argc, char** argv) { return negishi::cli::run_cli(argc, argv, std::cout, std::cerr); }
