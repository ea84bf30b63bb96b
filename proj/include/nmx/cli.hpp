#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nmx {

enum ExitCode : int {
  kExitOk = 0,
  kExitOther = 1,
  kExitUsage = 2,
  kExitParse = 3,
  kExitValidation = 4,
  kExitResource = 5,
  kExitVerifyFail = 6,
};

// Runs the command line `args` (without the program name). Reports go to `out`, diagnostics and
// wall time to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nmx
