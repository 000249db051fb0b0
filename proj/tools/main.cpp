#include <iostream>
#include <string>
#include <vector>

#include "piezotherm/cli.hpp"

int main(int argc, char** argv) {
    return piezotherm::run_command(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
