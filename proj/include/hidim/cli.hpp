#pragma once

#include <string>
#include <vector>

namespace hidim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;      // usage / configuration errors
inline constexpr int kExitData = 2;       // data, schema, parse, or I/O errors
inline constexpr int kExitNumerical = 3;  // numerical failures

/// Full CLI entry point. args excludes the program name.
int run(const std::vector<std::string>& args);

int run(int argc, const char* const* argv);

}  // namespace hidim::cli
