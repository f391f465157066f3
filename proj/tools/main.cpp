#include <iostream>
#include <string>
#include <vector>

#include "trapsight/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return trapsight::run_cli(args, std::cout, std::cerr);
}
