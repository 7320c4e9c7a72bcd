#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace zerofail::cli {

/// Exit codes of the `zerofail` tool.
enum ExitCode : int {
    kOk = 0,
    kUsageOrInputError = 2,
    kNoPositives = 3,
};

/// Runs the command line `args` (without the program name). Reports go to
/// `out` unless `--out` is given; diagnostics always go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace zerofail::cli
