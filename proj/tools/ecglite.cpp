#include <iostream>

#include "ecglite/cli/commands.hpp"

int main(int argc, char** argv) { return ecglite::cli::run(argc, argv, std::cout, std::cerr); }
