#include <iostream>

#include "cfmob/cli.hpp"

int main(int argc, char** argv) { return cfmob::cli::run_cli(argc, argv, std::cout, std::cerr); }
