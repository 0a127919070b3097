#include <iostream>

#include "clca/cli.hpp"

int main(int argc, char** argv) {
  return clca::run_cli(argc, argv, std::cin, std::cout, std::cerr);
}
