#include <iostream>
#include <string>
#include <vector>

#include "bawkit/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return bawkit::run_cli(args, std::cout, std::cerr);
}
