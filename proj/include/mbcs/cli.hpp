#pragma once

#include <string>
#include <vector>

namespace mbcs {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitPartial = 2;
inline constexpr int kExitCheckFailed = 3;

/// Parses argv, runs the command and writes artifacts. Returns the exit status.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

/// Inclusive linear range "a:b:n".
std::vector<double> parse_range(const std::string& spec);
/// Comma-separated list of numbers.
std::vector<double> parse_list(const std::string& spec);

}  // namespace mbcs
