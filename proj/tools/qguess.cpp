#include <iostream>
#include <string>
#include <vector>

#include "qguess/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return qguess::run_cli(args, std::cout, std::cerr);
}
