#include "reinfix/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return reinfix::cli::run(argc, argv, std::cout, std::cerr); }
