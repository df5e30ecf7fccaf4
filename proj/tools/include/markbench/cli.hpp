#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace markbench::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFailure = 2;

/// Entry point of the markbench command. Normal output goes to `out`,
/// diagnostics and progress to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace markbench::cli
