#ifndef FRAISSE_CLI_HPP
#define FRAISSE_CLI_HPP

#include <iosfwd>

namespace fraisse {

enum ExitCode : int { exit_ok = 0, exit_failure = 1, exit_usage = 2, exit_internal = 3 };

/// Runs one subcommand. Results go to `out` (or the files named by --out
/// flags), diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fraisse

#endif  // FRAISSE_CLI_HPP
