#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sparseglm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;  // invalid flags, parameters or datafit/penalty pair
inline constexpr int kExitIo = 3;     // unreadable data, unwritable output

/// Environment variable naming the directory searched for relative --data paths.
inline constexpr const char* kDataDirEnv = "SPARSEGLM_DATA_DIR";

/// Runs one command line (without the program name), e.g.
/// {"solve", "--penalty", "l1", "--lambda-ratio", "0.1"}. Summaries and
/// tables go to `out`, diagnostics to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sparseglm::cli
