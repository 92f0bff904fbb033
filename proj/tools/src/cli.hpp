#pragma once

#include <iosfwd>

namespace mqbsts::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kNumerical = 4 };

// Environment variable naming the default output directory; --out overrides it.
inline constexpr const char* kOutputDirEnv = "MQBSTS_OUTPUT_DIR";

// Entry point for the simulate, train, forecast and evaluate subcommands.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mqbsts::cli
