#include <iostream>

#include "mapfma/cli.hpp"

int main(int argc, char** argv) { return mapfma::cli_dispatch(argc, argv, std::cout, std::cerr); }
