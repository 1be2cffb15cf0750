#include <iostream>

#include "glrds/cli.hpp"

int main(int argc, char** argv) { return glrds::cli_main(argc, argv, std::cout, std::cerr); }
