#include <iostream>

#include "rainfree/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return rainfree::cli::run(args, std::cout, std::cerr);
}
