#include "segmig/driver.hpp"

#include <iostream>

int main(int argc, char **argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return segmig::run_cli(args, std::cout, std::cerr);
}
