#pragma once

#include <ostream>

namespace chartpulse::cli {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumerical = 3 };

/// Parses argv, runs one subcommand and maps failures to exit codes.
/// Diagnostics go to `err`, summaries and help to `out`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace chartpulse::cli
