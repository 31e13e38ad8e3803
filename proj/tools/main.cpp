#include <iostream>
#include <string>
#include <vector>

#include "ptdisc/cli.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    return ptdisc::run_command(args, std::cout, std::cerr);
}
