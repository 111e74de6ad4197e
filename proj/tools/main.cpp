#include <iostream>

#include "orbit/cli.hpp"

int main(int argc, char** argv) { return orbit::run_cli(argc, argv, std::cout, std::cerr); }
