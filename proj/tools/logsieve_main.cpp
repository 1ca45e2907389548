#include <iostream>

#include "logsieve/cli.hpp"

int main(int argc, char** argv) { return logsieve::cli::run(argc, argv, std::cout, std::cerr); }
