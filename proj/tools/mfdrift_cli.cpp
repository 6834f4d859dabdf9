#include <iostream>

#include "mfdrift/cli.hpp"

int main(int argc, char** argv) { return mfdrift::run_cli(argc, argv, std::cout, std::cerr); }
