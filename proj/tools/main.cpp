#include <iostream>
#include <string>
#include <vector>

#include "unitask/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return unitask::cli_main(args, std::cout, std::cerr);
}
