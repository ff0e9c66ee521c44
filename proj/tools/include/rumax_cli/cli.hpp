#pragma once

#include <iosfwd>

namespace rumax::cli {

enum ExitCode : int {
    kOk = 0,
    kIoError = 1,
    kNotConverged = 2,
    kDualityBreach = 3,
};

/// Runs one command line. Diagnostics go to `err`, summaries to `out`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rumax::cli
