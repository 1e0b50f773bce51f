#pragma once

#include <string>
#include <vector>

namespace vt::cli {

// Entry point of the `vt` binary. Returns the process exit code:
// 0 success, 1 usage, 2 data/format, 3 numeric failure. Errors are written
// to stderr as one line of JSON.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);  // args[0] is the program name

}  // namespace vt::cli
