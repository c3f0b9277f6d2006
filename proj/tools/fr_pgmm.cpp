#include <iostream>

#include "fr/cli.hpp"

int main(int argc, char** argv) { return fr::cli_main(argc, argv, std::cout, std::cerr); }
