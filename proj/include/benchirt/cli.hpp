#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace benchirt::cli {

enum ExitCode : int {
  ok = 0,
  internal_error = 1,
  input_error = 2,
  not_converged = 3,
  id_mismatch = 4,
};

/// Runs the command line `args` (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace benchirt::cli
