#pragma once

// Command-line front end. Exit codes: 0 success, 1 I/O failure, 2 parse or
// validation error, 3 reproduction mismatch.

#include <ostream>
#include <string>
#include <vector>

namespace ctcmbqc {

inline constexpr int kExitIo = 1;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitMismatch = 3;

/// args excludes the program name.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace ctcmbqc
