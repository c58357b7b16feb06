#pragma once

#include <ostream>
#include <span>
#include <string>

namespace bacforge::cli {

enum ExitCode : int { kPass = 0, kFail = 1, kUsage = 2 };

/// args excludes the program name. JSON goes to out, summaries and errors to err.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace bacforge::cli
