#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace wpb {

/// Exit statuses of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitInput = 1, kExitDomain = 2 };

/// Entry point of the `wpb` tool; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wpb
