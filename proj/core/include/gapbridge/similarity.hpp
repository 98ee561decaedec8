#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gapbridge/embedding_store.hpp"
#include "gapbridge/modality.hpp"

namespace gapbridge {

struct ScoredCandidate {
  std::string item_id;
  Modality modality = Modality::kText;
  double raw_cos = 0.0;
  /// Present only for standardized retrieval.
  std::optional<double> std_score;

  friend bool operator==(const ScoredCandidate&, const ScoredCandidate&) = default;
};

/// Dot product of two unit vectors, accumulated in 64-bit in index order.
/// Throws kDimMismatch on unequal lengths.
double cosine(std::span<const float> u, std::span<const float> v);

/// Cosine of `query` against every item of `view`, aligned to view order.
/// Throws kEmptyModality for an empty view.
std::vector<double> all_scores(std::span<const float> query, const ModalityView& view);

/// Positions of the `k` largest scores ordered by (score desc, position asc).
/// Scores compare exactly; no epsilon.
std::vector<std::uint32_t> select_top_k(std::span<const double> scores, std::size_t k);

/// Exact top-k of `view` by raw cosine; ties go to the smaller id.
/// Throws kEmptyModality when k > 0 and the view is empty.
std::vector<ScoredCandidate> top_k(std::span<const float> query, const ModalityView& view,
                                   std::size_t k);

}  // namespace gapbridge
