#include <iostream>

#include "coreshape/cli.hpp"

int main(int argc, char** argv) {
    return coreshape::cli::run_cli(argc, argv, std::cout, std::cerr);
}
