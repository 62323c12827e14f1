#include <iostream>

#include "roughbattery/cli.hpp"

int main(int argc, char** argv) { return roughbattery::cli::run_cli(argc, argv, std::cout, std::cerr); }
