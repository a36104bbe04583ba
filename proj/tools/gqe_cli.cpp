#include <iostream>
#include <string>
#include <vector>

#include "gqe/cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return gqe::cli::run(std::move(args), std::cout, std::cerr);
}
