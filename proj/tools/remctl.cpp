#include <iostream>
#include <string>
#include <vector>

#include "remctl_cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return remctl::run(args, std::cout, std::cerr);
}
