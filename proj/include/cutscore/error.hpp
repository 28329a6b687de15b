#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cutscore {

enum class ErrorCode {
  kSourceNotFound,
  kMalformedSource,
  kIncompatibleFrames,
  kEmptyVideo,
  kEmptyInput,
  kIncompleteDetections,
  kMalformedDetections,
  kNoConsistentTempo,
  kUnplannableSection,
  kParseError,
  kInconsistentPlan,
  kEmptyMelody,
  kMissingInstrument,
  kInvalidEvent,
  kMalformedMidi,
  kUnsupportedFormat,
  kStemMismatch,
  kMalformedWav,
  kInvalidConfig,
  kExternalTool,
  kMissingTemplate,
  kIo,
};

std::string_view error_code_name(ErrorCode code);

// All library failures are reported through this one exception type; the
// code is what callers (and the CLI exit-code mapping) switch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cutscore
