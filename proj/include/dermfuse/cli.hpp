#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dermfuse::cli {

// Runs one subcommand. `args` excludes the program name.
// Returns 0 on success, 1 on a validation or I/O failure (one-line diagnostic on `err`),
// 2 on a usage error.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dermfuse::cli
