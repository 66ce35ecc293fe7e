#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace minnorm::cli {

/// Exit codes: 0 success, 1 bad input or usage, 2 solver failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace minnorm::cli
