#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace flowssl::cli {

enum ExitCode : int { kSuccess = 0, kUsage = 1, kDataError = 2, kSolverFailure = 3 };

// Parses `args` (without the program name) and runs the subcommand.
// Diagnostics go to `err`; JSON written to stdout goes to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Shortest round-trip text for a lambda value, used in file names.
std::string format_lambda(double lambda);

}  // namespace flowssl::cli
