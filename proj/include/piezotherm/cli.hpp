#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace piezotherm {

/// Exit statuses of the command-line driver.
enum ExitCode : int { exit_ok = 0, exit_invalid = 1, exit_solver = 2, exit_diverged = 3 };

/// args[0] is the program name. Commands: forward, epsilon-study,
/// convergence, derivative-check, observe, invert, validate.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace piezotherm
