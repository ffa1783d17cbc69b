#include <iostream>

#include "hopqa/cli.hpp"

int main(int argc, char** argv) { return hopqa::run_cli(argc, argv, std::cout, std::cerr); }
