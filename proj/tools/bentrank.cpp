#include "bentrank/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return bentrank::run_cli(argc, argv, std::cout, std::cerr); }
