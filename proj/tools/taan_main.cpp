#include "taan/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return taan::cli::run(argc, argv, std::cout, std::cerr); }
