#include <iostream>

#include "hanle/commands.hpp"

int main(int argc, char** argv) { return hanle::run_cli(argc, argv, std::cout, std::cerr); }
