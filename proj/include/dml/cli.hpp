#pragma once

#include <string>
#include <vector>

namespace dml::cli {

// Exit codes, one class per failure family so scripts can branch on them.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitConfig = 3;
inline constexpr int kExitIo = 4;
inline constexpr int kExitDivergence = 5;

// Runs one invocation; args exclude the program name. The binary's main() is
// a thin wrapper, so tests drive subcommands in-process.
int run(const std::vector<std::string>& args);

}  // namespace dml::cli
