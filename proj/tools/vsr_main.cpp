#include <vector>

#include "vsr/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return vsr::run_cli(args);
}
