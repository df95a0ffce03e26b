#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tarc::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitConfig = 2,
  kExitNumerical = 3,
  kExitInfeasible = 4,
};

/// Entry point behind main(); argv[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// 17 significant digits, '.' separator, independent of locale.
std::string format_number(double value);

}  // namespace tarc::cli
