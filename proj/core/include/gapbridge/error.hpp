#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gapbridge {

/// Machine-readable failure categories. The CLI prints `to_string(code)` on
/// stderr so scripts can branch on them.
enum class ErrorCode {
  kIo,
  kZeroVector,
  kNonFiniteValue,
  kDuplicateId,
  kDimMismatch,
  kChecksumMismatch,
  kCorruptManifest,
  kNormOutOfTolerance,
  kUnknownItem,
  kEmptyModality,
  kEmptyStore,
  kTooFewQueries,
  kTooFewPairs,
  kDegenerateStats,
  kMissingModalityStats,
  kMissingStats,
  kStatsMismatch,
  kInconsistentPair,
  kEmptyPositives,
  kMissingQrels,
  kBadRun,
  kConstantInput,
  kTooFewSamples,
  kBadRange,
  kDegenerateInput,
  kBadConfig,
  kMalformedInput,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gapbridge
