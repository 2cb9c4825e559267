#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace radiomap {

// Entry point of the `radiomap` tool. `args` excludes the program name.
// Results go to `out`, diagnostics to `err`; returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace radiomap
