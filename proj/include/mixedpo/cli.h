#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "mixedpo/errors.h"

namespace mixedpo {

// 0 success, 1 usage/validation (and other errors), 2 infeasible problem,
// 3 rank/conditioning failure.
int ExitCodeFor(ErrorCode code);

// Default output directory: $MIXEDPO_OUTPUT_DIR, else "mixedpo_out".
std::string DefaultOutputDir();

// Subcommands: solve, learn, npg, bench, hinf, iss. Diagnostics go to `err`
// as one line; results are printed to `out` and written under --out.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mixedpo
