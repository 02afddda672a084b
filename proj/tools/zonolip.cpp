#include <iostream>
#include <string>
#include <vector>

#include "zonolip/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return zonolip::run_cli(args, std::cout, std::cerr);
}
