#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace semopt {

// Parses and dispatches the CLI. Text summaries go to `out`, diagnostics to
// `err`. Returns the process exit code: 0 ok, 2 parse error, 3 validation or
// precondition error, 4 solver failure, 5 simulation mismatch, 1 internal.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace semopt
