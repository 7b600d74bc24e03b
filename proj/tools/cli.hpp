#pragma once

#include <iosfwd>

namespace canontok::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNegative = 1;  // check found a non-canonical sequence
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

// Entry point of the canontok executable. Streams are parameters so tests can
// drive subcommands in-process.
int run(int argc, char** argv, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace canontok::cli
