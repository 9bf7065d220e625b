#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ose::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kCounterfeit = 3,
  kInconclusive = 4,
};

/// Runs one command line (without the program name).
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, char** argv);

}  // namespace ose::cli
