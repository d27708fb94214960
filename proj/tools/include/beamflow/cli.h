#ifndef BEAMFLOW_CLI_H_
#define BEAMFLOW_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace beamflow::cli {

// Process exit statuses. Stable; documented in the README.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,     // I/O, validation, anything not listed below
  kUsage = 2,       // bad command line
  kInfeasible = 3,  // a node exceeds its P_max budget (artifacts written)
  kDiverged = 4,
  kNoRoute = 5,
  kLineSearch = 6,
};

// Runs `beamflow <args...>` (args excludes the program name). Normal output
// goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace beamflow::cli

#endif  // BEAMFLOW_CLI_H_
