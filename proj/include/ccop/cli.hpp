#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ccop::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,           // CcmStationary, certified point, oracle found a feasible point
  kNotCertified = 1, // ran to completion but the point is not stationary, or inner failure
  kInfeasible = 2,
  kLimit = 3,        // penalty or outer-iteration limit
  kUsage = 4,        // bad flags or invalid instance file
};

/// Entry point behind the `ccop` executable. args excludes the program name.
/// Results go to out, diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ccop::cli
