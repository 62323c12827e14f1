#pragma once

#include <iosfwd>

namespace roughbattery::cli {

/// Exit codes: 0 success, 1 usage error, 2 data, config or I/O error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Entry point behind the `roughbattery` executable. Data goes to files or
/// `out`; diagnostics go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace roughbattery::cli
