#include <string>
#include <vector>

#include "unitrhythm/cli.hpp"

int main(int argc, char** argv) {
  return unitrhythm::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
