#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace omega {

inline constexpr int kExitOk = 0;
inline constexpr int kExitAssumption = 1;
inline constexpr int kExitUsage = 2;

// Entry point of the omega_sim tool. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace omega
