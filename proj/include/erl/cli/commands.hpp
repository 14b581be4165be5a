#pragma once

// Entry point of the erlwv command-line tool, kept in the library so tests
// can drive it in-process.

#include <ostream>

namespace erl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // runtime or statistical failure
inline constexpr int kExitUsage = 2;    // bad arguments or configuration

/// Parses arguments and runs one subcommand (weakvalue, simulate, sweep,
/// verify, histogram). Reports go to out, diagnostics to err.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace erl::cli
