#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gapbridge/embedding_store.hpp"
#include "gapbridge/ranked_run.hpp"

namespace gapbridge {

/// kFraction: |hits| / |positives|. kAnyHit: 1 if any positive is retrieved.
enum class RecallMode { kFraction, kAnyHit };

std::string_view to_string(RecallMode m) noexcept;
RecallMode parse_recall_mode(std::string_view s);

// All metrics are percentages in [0, 100]. Each throws kEmptyPositives for
// an empty positive set. Ranks are 1-based.

double recall_at_k(std::span<const std::string> ranked, const std::set<std::string>& positives,
                   std::size_t k, RecallMode mode = RecallMode::kFraction);

/// 100 / rank of the first positive within the cutoff, else 0.
double mrr_at_k(std::span<const std::string> ranked, const std::set<std::string>& positives,
                std::size_t k);

/// Binary-gain NDCG with a log2(rank + 1) discount.
double ndcg_at_k(std::span<const std::string> ranked, const std::set<std::string>& positives,
                 std::size_t k);

std::vector<std::string> ranked_ids(std::span<const ScoredCandidate> ranking);

struct QueryMetrics {
  double recall = 0.0;
  double mrr = 0.0;
  double ndcg = 0.0;
};

struct GroupMetrics {
  std::size_t count = 0;
  QueryMetrics mean;
};

inline constexpr std::string_view kOverallGroup = "overall";
inline constexpr std::string_view kUnknownGroup = "unknown";

struct MetricReport {
  ScoreMethod method = ScoreMethod::kCos;
  std::size_t k = 0;
  RecallMode recall_mode = RecallMode::kFraction;
  std::map<std::string, QueryMetrics> per_query;
  /// Keyed by "TextQ", "ImageQ", "unknown" (only groups that occur) and "overall".
  std::map<std::string, GroupMetrics, std::less<>> groups;
};

/// Scores every query of `run` at cutoff `k`. Queries without a qtype are
/// grouped as "unknown". Throws kMissingQrels if a run query has no qrels.
MetricReport evaluate_run(const RankedRun& run, const Qrels& qrels,
                          const std::map<std::string, QueryType>& qtypes, std::size_t k,
                          RecallMode mode = RecallMode::kFraction);

}  // namespace gapbridge
