#pragma once

#include <string>
#include <vector>

namespace gridmc {

// Exit codes: 0 success, 1 usage error, 2 parse/validate error, 3 solver
// error. argv-style interface so tests can drive it in-process.
int run_cli(const std::vector<std::string>& args);

}  // namespace gridmc
