#include "hermit/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return hermit::cli::main_entry(argc, argv, std::cout, std::cerr); }
