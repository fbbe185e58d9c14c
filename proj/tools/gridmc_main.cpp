#include <vector>

#include "gridmc/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return gridmc::run_cli(args);
}
