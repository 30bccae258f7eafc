#include <iostream>
#include <string>
#include <vector>

#include "wasubench/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return wasubench::dispatch(args, std::cout, std::cerr);
}
