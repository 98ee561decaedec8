#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gapbridge/similarity.hpp"

namespace gapbridge {

/// `kCos` ranks by raw cosine, `kStd` by modality-standardized score.
enum class ScoreMethod { kCos, kStd };

std::string_view to_string(ScoreMethod m) noexcept;
ScoreMethod parse_score_method(std::string_view s);

/// Per-query ranked candidate lists produced by one retrieval method.
struct RankedRun {
  ScoreMethod method = ScoreMethod::kCos;
  std::size_t k = 0;
  std::map<std::string, std::vector<ScoredCandidate>> per_query;
};

}  // namespace gapbridge
