#include <string>
#include <vector>

#include "csiloc/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return csiloc::run_cli(args);
}
