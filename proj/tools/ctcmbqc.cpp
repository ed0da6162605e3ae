#include <iostream>
#include <string>
#include <vector>

#include "ctcmbqc/cli.hpp"

int main(int argc, char **argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return ctcmbqc::run_cli(args, std::cout, std::cerr);
}
