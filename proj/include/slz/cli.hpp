#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace slz {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Entry point of the `slz` tool. `args` excludes the program name; the first
/// element is the subcommand. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace slz
