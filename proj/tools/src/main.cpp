#include <iostream>

#include "mono3d_cli/cli.hpp"

int main(int argc, char** argv) {
  return mono3d::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
