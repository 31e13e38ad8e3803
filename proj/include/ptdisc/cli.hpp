#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ptdisc {

// Parses argv (program name excluded) and runs one subcommand:
// design | tau | simulate | sweep | verify.
// Returns the process exit status: 0 success, 1 domain error, 2 usage
// error.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ptdisc
