#include <vector>

#include "spage/cli_app.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return spage::cli::run_command(args);
}
