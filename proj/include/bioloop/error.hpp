#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bioloop {

enum class ErrorCode {
  kInvalidArgument,
  kConfig,
  kDuplicateStream,
  kUnknownStream,
  kInsufficientMarks,
  kZeroDt,
  kTooFewSamples,
  kTooFewIntervals,
  kOutOfRange,
  kMissingLandmarks,
  kMalformedReply,
  kUncalibrated,
  kNoUsableChannels,
  kNonMonotoneTime,
  kUnknownTemplate,
  kParse,
  kInvariantViolation,
  kIo,
};

std::string_view error_code_name(ErrorCode code);

// Every failure raised by the engine carries a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace bioloop
