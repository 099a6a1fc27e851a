#include <iostream>
#include <string>
#include <vector>

#include "mixedpo/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mixedpo::RunCli(args, std::cout, std::cerr);
}
