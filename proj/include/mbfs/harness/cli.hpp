#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mbfs::harness {

// Runs the command-line front end on `args` (args[0] is the program name).
// Returns 0 on success, 2 on a usage error and 1 on a runtime error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mbfs::harness
