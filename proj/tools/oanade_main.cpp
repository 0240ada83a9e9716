#include <iostream>
#include <string>
#include <vector>

#include "oanade/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return oanade::run_cli(args, std::cout, std::cerr);
}
