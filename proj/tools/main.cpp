#include <string>
#include <vector>

#include "commands.hpp"

int main(int argc, char** argv) {
  return hodgemix::cli::run_command(std::vector<std::string>(argv + 1, argv + argc));
}
