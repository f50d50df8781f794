#include <iostream>

#include "wcps/gateway/cli.hpp"

int main(int argc, char** argv) { return wcps::run_cli(argc, argv, std::cout, std::cerr); }
