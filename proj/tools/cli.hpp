#pragma once

#include <string>
#include <vector>

// emccd-cal command line: simulate | fit | calibrate | sweep | compare.

namespace emccd::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kIo = 3,
  kContract = 4,
  kEstimation = 5,
  kDisagreement = 6,
};

/// Runs one command line (args[0] is the program name) and returns the
/// process exit code. Errors are logged, never thrown.
int run(const std::vector<std::string>& args);

}  // namespace emccd::cli
