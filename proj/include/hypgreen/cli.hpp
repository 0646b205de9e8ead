#pragma once

namespace hypgreen::cli {

/// Entry point of the command line tool; returns the process exit code.
/// Exit codes: 0 all gates pass, 1 a residual gate failed, 2 usage or
/// input-file errors, 3 internal numerical failure.
int run(int argc, const char* const* argv);

}  // namespace hypgreen::cli
