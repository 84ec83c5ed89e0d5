#include <string>
#include <vector>

#include "wildsieve/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return wildsieve::cli::run(args);
}
