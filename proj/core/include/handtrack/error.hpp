#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace handtrack {

enum class ErrorCode {
  kInvalidInput,
  kCalibrationFailure,
  kBehindCamera,
  kInvalidDepth,
  kDepthHole,
  kNoData,
  kFormat,
  kVersionMismatch,
  kMissingGroundTruth,
  kIo,
  kGenerationFailure,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so that
// callers (the CLI in particular) can map error classes to exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace handtrack
