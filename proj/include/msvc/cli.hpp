#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace msvc {

/// Exit codes of the command line front end.
enum ExitCode : int { exit_ok = 0, exit_input = 2, exit_numerical = 3 };

/// Runs the command line with args excluding the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace msvc
