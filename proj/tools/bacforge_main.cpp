#include <iostream>
#include <string>
#include <vector>

#include "bacforge/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return bacforge::cli::run(args, std::cout, std::cerr);
}
