#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "qms/dynamics.hpp"

namespace qms {

/// Exit codes of the command-line tool.
enum ExitCode : int { exit_ok = 0, exit_verify_failed = 1, exit_config = 2, exit_runtime = 3 };

/// Runs `qms <args...>` (args excludes the program name) and returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// CSV text: t, q1..qN, p1..pN, H, Cl2..ClN, Cr2..Cr(N-1), 17 significant digits.
std::string trajectory_csv(const TrajectoryRecord& rec);

/// Shortest decimal text that parses back to the same double.
std::string format_number(double v);

}  // namespace qms
