#pragma once

#include "run_config.h"

namespace contrakt::cli {

enum ExitCode { kExitOk = 0, kExitRefuted = 1, kExitInputError = 2 };

struct CommandResult {
  Json result;
  int exit_code = kExitOk;
};

// Resolves the config (auto values are written back so the manifest shows
// what ran), executes the command and writes any CSV artifacts.
CommandResult run_command(RunConfig& config);

}  // namespace contrakt::cli
