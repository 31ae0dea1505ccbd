#include <iostream>
#include <string>
#include <vector>

#include "flare/cli/app.hpp"

int main(int argc, char** argv) {
    return flare::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
