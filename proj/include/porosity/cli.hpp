#pragma once

#include <iosfwd>

namespace porosity {

/// Exit codes of the command-line front end.
enum ExitCode : int { kExitPass = 0, kExitFail = 1, kExitConfig = 2 };

/// Runs the porosity command line (certify, field, cover, sweep, demo).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace porosity
