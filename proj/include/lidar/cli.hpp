#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lidar {

/// Runs one CLI invocation (args exclude the program name) and writes reports
/// to the given streams. Exit codes: 0 success, 1 data error, 2 usage error;
/// `prop1-check` additionally exits 1 when the bound is violated. Every
/// machine-readable line is prefixed with `#RESULT `.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace lidar
