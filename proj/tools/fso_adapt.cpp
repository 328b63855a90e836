#include <iostream>

#include "fso/cli.hpp"

int main(int argc, char** argv) { return fso::cli::run(argc, argv, std::cout, std::cerr); }
