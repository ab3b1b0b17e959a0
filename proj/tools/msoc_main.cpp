#include <vector>

#include "msoc/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return msoc::run_cli(args);
}
