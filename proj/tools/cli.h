#pragma once

#include <ostream>

namespace pmjls::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitUncertified = 3;
inline constexpr int kExitNumericalFailure = 4;

/// Runs one `mjls` command. Reports go to `out`, diagnostics to `err`.
int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pmjls::cli
