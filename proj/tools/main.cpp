#include <iostream>

#include "radiomap/cli.hpp"

int main(int argc, char** argv) {
  return radiomap::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
