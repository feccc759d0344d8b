#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace graf {

/// Runs one `graf` subcommand. `args` excludes the program name. Returns 0
/// on success, 2 on a usage error and 1 on any other failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

}  // namespace graf
