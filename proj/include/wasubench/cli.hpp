#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wasubench {

inline constexpr const char* kRegistryEnvVar = "WASUBENCH_REGISTRY";

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command line (without the program name). Human-readable output
/// goes to `out`, diagnostics and usage text to `err`.
///
/// Returns kExitOk, kExitFailure for operational failures, or kExitUsage for
/// malformed invocations.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wasubench
