#include <iostream>

#include "fima/commands.hpp"

int main(int argc, char** argv) { return fima::run_cli(argc, argv, std::cout, std::cerr); }
