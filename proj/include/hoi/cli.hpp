#pragma once

#include <string>
#include <vector>

namespace hoi::cli {

/// Exit codes: 0 success, 1 invalid configuration or input, 2 computation failure.
int run(int argc, char** argv);
int run(const std::vector<std::string>& args);

}  // namespace hoi::cli
