#pragma once

namespace eqsadj {

// Parses and dispatches the eqsadj command line (subcommands run,
// convergence, check, export-scenario). Returns the process exit code:
// 0 success, 1 solver failure or failed check, 2 usage/config errors.
int run_cli(int argc, const char* const* argv);

}  // namespace eqsadj
