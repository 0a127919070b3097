#pragma once

#include <iosfwd>

namespace clca {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Entry point for `clca <gen-data|train|eval|chat|serve> ...`. Exit codes:
// 0 success, 1 runtime error, 2 usage error.
int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out,
            std::ostream& err);

}  // namespace clca
