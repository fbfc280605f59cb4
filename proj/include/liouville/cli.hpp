#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace liouville::cli {

/// Exit codes of the command-line front end.
enum Exit : int {
  ok = 0,
  parse_error = 2,
  solver_error = 3,
  inversion_error = 4,
  verify_failed = 5,
  fit_failed = 6,
};

/// Runs one command; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Writes `content` to `path` through a temporary file and a rename; "-" means `out`.
void write_atomic(const std::string& path, const std::string& content, std::ostream& out);

}  // namespace liouville::cli
