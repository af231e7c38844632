#include <iostream>

#include "geq/commands.hpp"

int main(int argc, char** argv) { return geq::cli::run(argc, argv, std::cout, std::cerr); }
