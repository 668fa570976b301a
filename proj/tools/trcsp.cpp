#include <iostream>
#include <string>
#include <vector>

#include "trcsp/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return trcsp::cli::run(args, std::cout, std::cerr);
}
