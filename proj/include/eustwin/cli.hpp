#pragma once

#include <string>
#include <vector>

namespace eustwin::cli {

/// Run the command line; returns the process exit status (0 success, 2
/// configuration error, 3 data error). Output goes to stdout, logs to stderr.
int run(int argc, char** argv);
int run(const std::vector<std::string>& args);

}  // namespace eustwin::cli
