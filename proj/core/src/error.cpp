#include "gapbridge/error.hpp"

namespace gapbridge {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kNonFiniteValue: return "NonFiniteValue";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::kCorruptManifest: return "CorruptManifest";
    case ErrorCode::kNormOutOfTolerance: return "NormOutOfTolerance";
    case ErrorCode::kUnknownItem: return "UnknownItem";
    case ErrorCode::kEmptyModality: return "EmptyModality";
    case ErrorCode::kEmptyStore: return "EmptyStore";
    case ErrorCode::kTooFewQueries: return "TooFewQueries";
    case ErrorCode::kTooFewPairs: return "TooFewPairs";
    case ErrorCode::kDegenerateStats: return "DegenerateStats";
    case ErrorCode::kMissingModalityStats: return "MissingModalityStats";
    case ErrorCode::kMissingStats: return "MissingStats";
    case ErrorCode::kStatsMismatch: return "StatsMismatch";
    case ErrorCode::kInconsistentPair: return "InconsistentPair";
    case ErrorCode::kEmptyPositives: return "EmptyPositives";
    case ErrorCode::kMissingQrels: return "MissingQrels";
    case ErrorCode::kBadRun: return "BadRun";
    case ErrorCode::kConstantInput: return "ConstantInput";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kBadRange: return "BadRange";
    case ErrorCode::kDegenerateInput: return "DegenerateInput";
    case ErrorCode::kBadConfig: return "BadConfig";
    case ErrorCode::kMalformedInput: return "MalformedInput";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

}  // namespace gapbridge
