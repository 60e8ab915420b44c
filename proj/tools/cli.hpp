#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace zoosel::cli {

// Runs one command line (args[0] is the program name). Returns the exit code;
// the report goes to `out` (or --out), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace zoosel::cli
