#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace uotkit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;     // bad arguments, missing or invalid input files
inline constexpr int kExitInternal = 3;  // invariant violation, failed self-check

/// Runs one command. `args` excludes the program name. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace uotkit::cli
