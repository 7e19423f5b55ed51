#include "monoglm_cli/run.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return monoglm::cli::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
