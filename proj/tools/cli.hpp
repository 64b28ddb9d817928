#pragma once

// Command-line front end. Exit codes: 0 success or pass, 1 domain-level
// negative (incompatible volume, failed pose inference), 2 usage or
// internal error.

#include <iosfwd>
#include <string>
#include <vector>

namespace orbitpose::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNegative = 1;
inline constexpr int kExitError = 2;

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace orbitpose::cli
