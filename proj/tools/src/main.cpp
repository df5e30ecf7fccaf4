#include <iostream>

#include "markbench/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return markbench::cli::run(args, std::cout, std::cerr);
}
