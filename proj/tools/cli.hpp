#pragma once

#include <ostream>

namespace handtrack::cli {

// Exit statuses, one per error class.
enum ExitCode : int {
  kOk = 0,
  kUnexpected = 1,
  kUsage = 2,
  kInvalidInput = 3,
  kFormat = 4,
  kVersionMismatch = 5,
  kMissingGroundTruth = 6,
  kIo = 7,
  kGenerationFailure = 8,
  kGradCheckFailed = 9,
  kNoData = 10,
};

/// Parses argv and runs one subcommand. Never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace handtrack::cli
