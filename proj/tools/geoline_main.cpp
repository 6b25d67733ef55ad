#include <vector>
#include <string>

#include "geoline/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return geoline::cli::run(args);
}
