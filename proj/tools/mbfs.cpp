#include <iostream>
#include <string>
#include <vector>

#include "mbfs/harness/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return mbfs::harness::run_cli(args, std::cout, std::cerr);
}
