#pragma once

#include <string>
#include <vector>

namespace wildsieve::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

/// Runs one subcommand. `args` excludes the program name. Returns the
/// process exit code; nothing is thrown.
int run(const std::vector<std::string>& args);

/// Sets the global log level from WILDSIEVE_LOG (error, warn, info, debug).
void configure_logging();

}  // namespace wildsieve::cli
