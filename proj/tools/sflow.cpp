#include <iostream>

#include "sflow/cli.hpp"

int main(int argc, char** argv) { return sflow::cli_main(argc, argv, std::cout, std::cerr); }
