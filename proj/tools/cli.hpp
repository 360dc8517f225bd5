#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mnardre::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2, kDataError = 3, kNumericError = 4 };

/// Runs the command line `args` (program name excluded). "-" as an output
/// path writes to `out`; diagnostics and warnings go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mnardre::cli
