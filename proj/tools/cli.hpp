#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spectrack::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Runs one `spectrack` invocation; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace spectrack::cli
