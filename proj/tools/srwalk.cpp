#include <iostream>

#include "srw/cli.hpp"

int main(int argc, char** argv) { return srw::cli::run(argc, argv, std::cout, std::cerr); }
