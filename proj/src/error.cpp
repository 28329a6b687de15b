#include "cutscore/error.hpp"

namespace cutscore {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSourceNotFound: return "source-not-found";
    case ErrorCode::kMalformedSource: return "malformed-source";
    case ErrorCode::kIncompatibleFrames: return "incompatible-frames";
    case ErrorCode::kEmptyVideo: return "empty-video";
    case ErrorCode::kEmptyInput: return "empty-input";
    case ErrorCode::kIncompleteDetections: return "incomplete-detections";
    case ErrorCode::kMalformedDetections: return "malformed-detections";
    case ErrorCode::kNoConsistentTempo: return "no-consistent-tempo";
    case ErrorCode::kUnplannableSection: return "unplannable-section";
    case ErrorCode::kParseError: return "parse-error";
    case ErrorCode::kInconsistentPlan: return "inconsistent-plan";
    case ErrorCode::kEmptyMelody: return "empty-melody";
    case ErrorCode::kMissingInstrument: return "missing-instrument";
    case ErrorCode::kInvalidEvent: return "invalid-event";
    case ErrorCode::kMalformedMidi: return "malformed-midi";
    case ErrorCode::kUnsupportedFormat: return "unsupported-format";
    case ErrorCode::kStemMismatch: return "stem-mismatch";
    case ErrorCode::kMalformedWav: return "malformed-wav";
    case ErrorCode::kInvalidConfig: return "invalid-config";
    case ErrorCode::kExternalTool: return "external-tool";
    case ErrorCode::kMissingTemplate: return "missing-template";
    case ErrorCode::kIo: return "io-error";
  }
  return "unknown";
}

}  // namespace cutscore
