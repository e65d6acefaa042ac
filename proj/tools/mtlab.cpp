#include <iostream>
#include <string>
#include <vector>

#include "mtlab/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return mtlab::run_cli(args, std::cout, std::cerr);
}
