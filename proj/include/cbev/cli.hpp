#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cbev::cli {

enum ExitCode : int { ok = 0, runtime_error = 1, usage_error = 2 };

/// Runs the command line given as argv-style strings, first element being the
/// program name. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace cbev::cli
