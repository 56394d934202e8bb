// Copyright 2026 The latprune Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef LATPRUNE_CLI_HPP_
#define LATPRUNE_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace latprune {

// Process exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitInputError = 1,
  kExitInfeasible = 2,
  kExitLimit = 3,
};

// Runs the command line `args` (without the program name). Diagnostics go to
// `err`, summaries to `out`.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace latprune

#endif  // LATPRUNE_CLI_HPP_
