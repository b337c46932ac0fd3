#pragma once

#include <iosfwd>

namespace hppl {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitEnvironment = 2 };

/// Entry point of `hybrid-infer`. Subcommands: check, analyze, infer,
/// oracle, bench and simulate. Results go to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hppl
