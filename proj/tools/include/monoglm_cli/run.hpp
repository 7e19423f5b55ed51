#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace monoglm::cli {

enum ExitCode : int { exit_success = 0, exit_input_error = 1, exit_not_converged = 2, exit_selfcheck_failed = 3 };

/// Entry point shared by the executable and the tests. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace monoglm::cli
