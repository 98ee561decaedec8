#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gapbridge/embedding_store.hpp"
#include "gapbridge/modality.hpp"
#include "gapbridge/ranked_run.hpp"
#include "gapbridge/similarity.hpp"

namespace gapbridge {

/// A (query, item) pair with its raw cosine. Pseudo pairs hold the query's
/// top-1 item within one modality; labeled pairs hold a gold positive.
struct PseudoPair {
  std::string query_id;
  std::string item_id;
  Modality modality = Modality::kText;
  double score = 0.0;

  friend bool operator==(const PseudoPair&, const PseudoPair&) = default;
};

/// Pair lists indexed by `index_of(Modality)`, each ordered by query id.
using PairSets = std::array<std::vector<PseudoPair>, 2>;

/// For every query and both modalities, pairs the query with its
/// highest-cosine item (ties to the smaller id).
/// Throws kEmptyModality if either modality has no items and kTooFewQueries
/// for fewer than two queries.
PairSets build_pseudo_pairs(const QuerySet& queries, const EmbeddingStore& store,
                            unsigned threads = 1);

/// One pair per (query, positive) from qrels, routed by the positive's modality.
PairSets build_labeled_pairs(const QuerySet& queries, const Qrels& qrels,
                             const EmbeddingStore& store);

/// Checks that every pair references known ids and that its stored score
/// matches the recomputed cosine within `tolerance`.
void verify_pair_scores(const PairSets& pairs, const QuerySet& queries,
                        const EmbeddingStore& store, double tolerance = 1e-7);

enum class PairSource { kLabeled, kPseudo };
std::string_view to_string(PairSource s) noexcept;
PairSource parse_pair_source(std::string_view s);

/// kPopulation divides by N; kSample by N - 1.
enum class VarianceDivisor { kPopulation, kSample };

inline constexpr double kMinStd = 1e-6;
inline constexpr std::size_t kMinPairs = 2;

struct ModalityStats {
  double mean = 0.0;
  double std = 0.0;
  double variance = 0.0;
  std::size_t count = 0;

  friend bool operator==(const ModalityStats&, const ModalityStats&) = default;
};

/// Query-independent per-modality similarity statistics.
struct StatsBundle {
  std::array<std::optional<ModalityStats>, 2> per_modality;
  PairSource source = PairSource::kPseudo;
  std::string store_fingerprint;

  /// Throws kMissingModalityStats when `m` has no statistics.
  const ModalityStats& at(Modality m) const;
};

/// Mean and variance of `scores` with compensated summation in the given
/// order. Throws kTooFewPairs (< 2 scores) or kDegenerateStats (std < 1e-6).
ModalityStats estimate_modality_stats(std::span<const double> scores,
                                      VarianceDivisor divisor = VarianceDivisor::kPopulation);

StatsBundle estimate_stats(const PairSets& pairs, PairSource source,
                           std::string store_fingerprint,
                           VarianceDivisor divisor = VarianceDivisor::kPopulation);

/// (raw_cos - mean_m) / std_m.
double standardize(double raw_cos, const StatsBundle& stats, Modality m);

/// Ranks the whole store for one query. kCos orders by raw cosine, kStd by
/// standardized score. Ties order by score, then text before image, then id.
/// Throws kEmptyStore, kMissingStats (kStd without stats) or
/// kMissingModalityStats.
std::vector<ScoredCandidate> retrieve(std::span<const float> query, const EmbeddingStore& store,
                                      std::size_t k, ScoreMethod method,
                                      const StatsBundle* stats = nullptr);

RankedRun retrieve_all(const QuerySet& queries, const EmbeddingStore& store, std::size_t k,
                       ScoreMethod method, const StatsBundle* stats = nullptr,
                       unsigned threads = 1);

}  // namespace gapbridge
