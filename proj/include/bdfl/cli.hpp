#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bdfl {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitVerification = 2;

/// Batch harness. `args` excludes the program name. Returns 0 on success,
/// 2 when a bound or invariant is violated, 1 on usage/config errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace bdfl
