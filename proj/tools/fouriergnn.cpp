#include <iostream>

#include "fouriergnn/cli.hpp"

int main(int argc, char** argv) { return fgnn::run_cli(argc, argv, std::cout, std::cerr); }
