#include "gapbridge/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "gapbridge/error.hpp"
#include "gapbridge/numeric.hpp"

namespace gapbridge {

std::string_view to_string(RecallMode m) noexcept {
  return m == RecallMode::kFraction ? "fraction" : "any-hit";
}

RecallMode parse_recall_mode(std::string_view s) {
  if (s == "fraction") return RecallMode::kFraction;
  if (s == "any-hit") return RecallMode::kAnyHit;
  throw Error(ErrorCode::kBadConfig, "unknown recall mode '" + std::string(s) + "'");
}

namespace {

void require_positives(const std::set<std::string>& positives) {
  if (positives.empty()) throw Error(ErrorCode::kEmptyPositives, "positive set is empty");
}

/// 0-based positions within the cutoff holding a not-yet-seen positive.
std::vector<std::size_t> hit_positions(std::span<const std::string> ranked,
                                       const std::set<std::string>& positives, std::size_t k) {
  std::vector<std::size_t> hits;
  std::set<std::string_view> seen;
  const std::size_t depth = std::min(k, ranked.size());
  for (std::size_t i = 0; i < depth; ++i) {
    if (positives.contains(ranked[i]) && seen.insert(ranked[i]).second) hits.push_back(i);
  }
  return hits;
}

}  // namespace

double recall_at_k(std::span<const std::string> ranked, const std::set<std::string>& positives,
                   std::size_t k, RecallMode mode) {
  require_positives(positives);
  const auto hits = hit_positions(ranked, positives, k);
  if (mode == RecallMode::kAnyHit) return hits.empty() ? 0.0 : 100.0;
  return 100.0 * static_cast<double>(hits.size()) / static_cast<double>(positives.size());
}

double mrr_at_k(std::span<const std::string> ranked, const std::set<std::string>& positives,
                std::size_t k) {
  require_positives(positives);
  const auto hits = hit_positions(ranked, positives, k);
  return hits.empty() ? 0.0 : 100.0 / static_cast<double>(hits.front() + 1);
}

double ndcg_at_k(std::span<const std::string> ranked, const std::set<std::string>& positives,
                 std::size_t k) {
  require_positives(positives);
  const std::size_t ideal_depth = std::min(positives.size(), k);
  if (ideal_depth == 0) return 0.0;
  double dcg = 0.0;
  for (std::size_t pos : hit_positions(ranked, positives, k)) {
    dcg += 1.0 / std::log2(static_cast<double>(pos) + 2.0);
  }
  double idcg = 0.0;
  for (std::size_t i = 0; i < ideal_depth; ++i) idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  return 100.0 * dcg / idcg;
}

std::vector<std::string> ranked_ids(std::span<const ScoredCandidate> ranking) {
  std::vector<std::string> ids;
  ids.reserve(ranking.size());
  for (const auto& c : ranking) ids.push_back(c.item_id);
  return ids;
}

MetricReport evaluate_run(const RankedRun& run, const Qrels& qrels,
                          const std::map<std::string, QueryType>& qtypes, std::size_t k,
                          RecallMode mode) {
  MetricReport report;
  report.method = run.method;
  report.k = k;
  report.recall_mode = mode;

  struct Accumulator {
    std::size_t count = 0;
    CompensatedSum recall, mrr, ndcg;
    void add(const QueryMetrics& m) {
      ++count;
      recall.add(m.recall);
      mrr.add(m.mrr);
      ndcg.add(m.ndcg);
    }
  };
  std::map<std::string, Accumulator, std::less<>> acc;

  for (const auto& [qid, ranking] : run.per_query) {
    const std::set<std::string>* positives = qrels.find(qid);
    if (positives == nullptr) throw Error(ErrorCode::kMissingQrels, "no qrels for query '" + qid + "'");
    const std::vector<std::string> ids = ranked_ids(ranking);
    QueryMetrics m{recall_at_k(ids, *positives, k, mode), mrr_at_k(ids, *positives, k),
                   ndcg_at_k(ids, *positives, k)};
    report.per_query.emplace(qid, m);

    auto qt = qtypes.find(qid);
    const std::string group =
        qt == qtypes.end() ? std::string(kUnknownGroup) : std::string(to_string(qt->second));
    acc[group].add(m);
    acc[std::string(kOverallGroup)].add(m);
  }
  if (acc.empty()) acc[std::string(kOverallGroup)];

  for (const auto& [name, a] : acc) {
    GroupMetrics g;
    g.count = a.count;
    if (a.count > 0) {
      const double n = static_cast<double>(a.count);
      g.mean = {a.recall.value() / n, a.mrr.value() / n, a.ndcg.value() / n};
    }
    report.groups.emplace(name, g);
  }
  return report;
}

}  // namespace gapbridge
