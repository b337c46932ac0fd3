#include <iostream>

#include "hppl/cli/commands.hpp"

int main(int argc, char** argv) { return hppl::run_cli(argc, argv, std::cout, std::cerr); }
