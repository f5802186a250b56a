#pragma once

#include <string>
#include <vector>

namespace fleximo::cli {

// Dispatches one CLI invocation. args excludes the program name.
// Returns 0 on success, 1 for domain errors (JSON diagnostics on stderr),
// 2 for usage errors.
int run(const std::vector<std::string>& args);

} // namespace fleximo::cli
