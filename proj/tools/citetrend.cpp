#include <iostream>

#include "citetrend/cli.hpp"

int main(int argc, char** argv) { return citetrend::cli::run(argc, argv, std::cout, std::cerr); }
