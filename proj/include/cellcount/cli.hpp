// SPDX-License-Identifier: MIT
//
// The cellcount command line. Everything the tool prints goes through the
// two streams passed in, so tests can drive it in-process.
#pragma once

#include <ostream>

namespace cellcount {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitInput = 2,
  kExitSolver = 3,
  kExitAllFailed = 4,
};

// Subcommands: count, wcount, sample, wsample, mis, relnet, reduce.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cellcount
