#include <iostream>
#include <string>
#include <vector>

#include "safecase/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  safecase::cli::CommandOutcome r = safecase::cli::run(args);
  std::cout << r.out;
  std::cerr << r.err;
  return r.code;
}
