#pragma once

#include <string>
#include <vector>

namespace fae::cli {

/// Runs the command line `args` (args[0] is the program name) and returns
/// the process exit status. 0 only when every output was written and finite.
int run(const std::vector<std::string>& args);

}  // namespace fae::cli
