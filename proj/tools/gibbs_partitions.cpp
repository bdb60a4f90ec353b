#include <iostream>

#include "gibbs/cli.hpp"

int main(int argc, char** argv) { return gibbs::run_cli(argc, argv, std::cout, std::cerr); }
