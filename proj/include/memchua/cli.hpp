#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace memchua::cli {

/// Stable process exit codes.
enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kInputParse = 2,
    kFitFailure = 3,
    kDesignFailure = 4,
    kRuntimeFailure = 5,
};

/// Runs one command line (args excludes the program name) and returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace memchua::cli
