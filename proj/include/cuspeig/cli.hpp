#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cuspeig::cli {

/// Exit codes: 0 success, 1 numerical failure or failed verification,
/// 2 invalid configuration.
inline constexpr int exit_ok = 0;
inline constexpr int exit_failure = 1;
inline constexpr int exit_config = 2;

/// Parses argv-style arguments (without the program name) and runs one
/// subcommand. JSON goes to `out` unless an output path is given.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cuspeig::cli
