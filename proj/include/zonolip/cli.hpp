#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace zonolip {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitInvariant = 3;

// Runs the command-line tool. args[0] is the program name. Results go to
// out, diagnostics to err; the return value is the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace zonolip
