#include <iostream>

#include "jeesdp/cli.hpp"

int main(int argc, char** argv) { return jeesdp::run_cli(argc, argv, std::cout, std::cerr); }
