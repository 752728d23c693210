#include <iostream>

#include "lossdev/cli.hpp"

int main(int argc, char** argv) { return lossdev::run_cli(argc, argv, std::cout, std::cerr); }
