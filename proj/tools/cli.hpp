#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace epp::cli {

/// Exit codes of `run`.
enum ExitCode : int { ok = 0, io_failure = 1, usage = 2, invalid = 3, solver_failure = 4 };

/// Command-line entry point. Subcommands: measure, cycle, resolvent, pi,
/// simulate, compare, certify, sweep. Reports go to --out-dir as JSON (and
/// CSV plus plotting scripts for fields and histories); a one-line summary
/// per result goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace epp::cli
