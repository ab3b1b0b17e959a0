#pragma once

#include <string>
#include <vector>

namespace msoc {

/// Command-line front end. Exit codes: 0 success, 2 configuration error,
/// 3 solver not converged (artifacts still written), 4 I/O error.
int run_cli(const std::vector<std::string>& args);

} // namespace msoc
