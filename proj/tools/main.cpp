#include <iostream>

#include "totalrisk/cli.hpp"

int main(int argc, char** argv) { return totalrisk::cli_main(argc, argv, std::cout, std::cerr); }
