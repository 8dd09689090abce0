#pragma once

#include <string>
#include <vector>

namespace hodgemix::cli {

// Entry point of the hodgemix tool: `args` are the command line arguments
// after the program name. Returns the process exit status: 0 success,
// 2 input error, 3 numerical error, 4 I/O error.
int run_command(std::vector<std::string> args);

}  // namespace hodgemix::cli
