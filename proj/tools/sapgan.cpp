#include <iostream>

#include "sapgan/cli/app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return sapgan::cli::run(args, std::cout, std::cerr);
}
