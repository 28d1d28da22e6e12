#include <string>
#include <vector>

#include "lrcone/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return lrcone::cli::run(args);
}
