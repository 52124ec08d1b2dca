#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace adsv::cli {

enum ExitCode : int {
  kPass = 0,
  kFail = 2,
  kInconclusive = 3,
  kUsage = 64,
  kDataError = 65,
  kInternal = 70,
};

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name. Data goes to files; tables and diagnostics go to the
/// streams.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace adsv::cli
