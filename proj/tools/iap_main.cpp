#include <iostream>

#include "iap/cli.hpp"

int main(int argc, char** argv) { return iap::run_cli(argc, argv, std::cout, std::cerr); }
