#include <iostream>
#include <string>
#include <vector>

#include "inband/io/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return inband::io::cli_main(args, std::cout, std::cerr);
}
