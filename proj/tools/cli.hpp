#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace stconv::cli {

/// Exit codes: 0 success, 1 runtime failure, 2 usage error, 3 invalid
/// configuration. Failures print one `code: message` line to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stconv::cli
