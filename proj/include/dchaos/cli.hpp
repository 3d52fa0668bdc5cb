#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dchaos {

inline constexpr const char* kToolVersion = "0.1.0";

/// Runs one command line (without the program name). Returns the exit code:
/// 0 on success, 2 for invalid input, 1 for other failures.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dchaos
