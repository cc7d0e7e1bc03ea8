#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace shortfall {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitInputError = 2,
    kExitInfeasible = 3,
    kExitNumerical = 4,
};

/// Runs the `shortfall` command line (`args` excludes the program name).
/// Progress goes to `out` unless --quiet; failures are reported on `err` as
/// `error: <category>: <message>`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace shortfall
