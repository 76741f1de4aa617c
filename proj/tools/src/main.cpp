#include <iostream>

#include "qndcount/cli/commands.hpp"

int main(int argc, char** argv) { return qndcount::cli::run(argc, argv, std::cout, std::cerr); }
