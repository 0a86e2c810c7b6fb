#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ptnls::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitConfig = 2,
  kExitUnavailable = 3,
  kExitNumerical = 4,
};

/// Entry point of the `ptnls` tool; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ptnls::cli
