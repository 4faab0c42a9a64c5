#include <vector>

#include "poseadapt/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return poseadapt::run_cli(args);
}
