#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bgcam::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitSkippedInputs = 3; // finished, but some inputs were unreadable

/// Entry point of the `bgcam` tool. `args` excludes the program name.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace bgcam::cli
