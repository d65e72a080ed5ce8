#pragma once

#include <string>
#include <vector>

namespace sibp {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumerical = 3 };

/// Entry point of the `sibp` tool. Commands: generate, triplets, train,
/// predict, extend-hash, evaluate.
int run_cli(int argc, const char* const* argv);
/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace sibp
