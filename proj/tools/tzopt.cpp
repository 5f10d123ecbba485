#include <iostream>

#include "tzopt/cli.hpp"

int main(int argc, char** argv) {
    return tzopt::cli::run(argc, argv, std::cout, std::cerr);
}
