#include <string>
#include <vector>

#include "gcnref/cli.hpp"

int main(int argc, char** argv) {
    return gcnref::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
