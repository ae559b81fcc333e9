#include "fraisse/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return fraisse::run_cli(argc, argv, std::cout, std::cerr); }
