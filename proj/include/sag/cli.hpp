#pragma once

#include <ostream>

namespace sag {

/// Exit codes of the command-line front end.
enum ExitCode : int { kExitOk = 0, kExitInternal = 1, kExitInput = 2, kExitNumerical = 3, kExitOutOfMemory = 4 };

/// Runs `sag <subcommand> ...`; argv[0] is the program name.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sag
