#include <iostream>

#include "trapscope/cli.hpp"

int main(int argc, char** argv) { return trapscope::run_cli(argc, argv, std::cout, std::cerr); }
