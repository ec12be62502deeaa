#include <iostream>

#include "qms/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return qms::run_cli(args, std::cout, std::cerr);
}
