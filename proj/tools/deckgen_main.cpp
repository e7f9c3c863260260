#include <vector>

#include "deckgen/cli.hpp"

int main(int argc, char** argv) {
  return deckgen::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
