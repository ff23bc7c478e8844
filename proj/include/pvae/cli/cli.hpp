#pragma once

#include <iosfwd>

namespace pvae::cli {

/// Exit codes of run().
enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumericError = 3 };

/// Entry point for every subcommand. Reports go to --report or `out`;
/// diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pvae::cli
