#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cmc {

/// Runs one command. args excludes the program name. Returns the process exit
/// code: 0 success, 1 inconclusive or failed search, 2 error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cmc
