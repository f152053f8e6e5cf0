#pragma once

#include <string>
#include <vector>

namespace safecase::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerdict = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInternal = 3;

struct CommandOutcome {
  int code = kExitOk;
  std::string out;
  std::string err;
};

/// Runs one command line. `args` excludes the program name.
CommandOutcome run(const std::vector<std::string>& args);

}  // namespace safecase::cli
