#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace smg::cli {

enum ExitCode : int {
    kOk = 0,
    kParseError = 1,
    kBuildError = 2,
    kNotConverged = 3,
};

/// Runs the command line `args` (without the program name). Results go to
/// `out`, diagnostics, statistics and timings to `err`.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace smg::cli
