#include "gapbridge/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "gapbridge/error.hpp"
#include "gapbridge/numeric.hpp"
#include "gapbridge/parallel.hpp"

namespace gapbridge {

std::string_view to_string(ScoreMethod m) noexcept { return m == ScoreMethod::kCos ? "cos" : "std"; }

ScoreMethod parse_score_method(std::string_view s) {
  if (s == "cos") return ScoreMethod::kCos;
  if (s == "std") return ScoreMethod::kStd;
  throw Error(ErrorCode::kBadConfig, "unknown method '" + std::string(s) + "'");
}

std::string_view to_string(PairSource s) noexcept {
  return s == PairSource::kLabeled ? "labeled" : "pseudo";
}

PairSource parse_pair_source(std::string_view s) {
  if (s == "labeled") return PairSource::kLabeled;
  if (s == "pseudo") return PairSource::kPseudo;
  throw Error(ErrorCode::kBadConfig, "unknown pair source '" + std::string(s) + "'");
}

PairSets build_pseudo_pairs(const QuerySet& queries, const EmbeddingStore& store,
                            unsigned threads) {
  for (Modality m : kModalities) {
    if (store.view(m).empty()) {
      throw Error(ErrorCode::kEmptyModality,
                  "store has no " + std::string(to_string(m)) + " items for pseudo pairs");
    }
  }
  if (queries.size() < 2) {
    throw Error(ErrorCode::kTooFewQueries, "pseudo pairs need at least 2 queries, got " +
                                               std::to_string(queries.size()));
  }
  PairSets pairs;
  for (auto& list : pairs) list.resize(queries.size());
  parallel_for(queries.size(), threads, [&](std::size_t qi) {
    for (Modality m : kModalities) {
      auto best = top_k(queries.vector(qi), store.view(m), 1);
      pairs[index_of(m)][qi] = {queries.id(qi), std::move(best.front().item_id), m,
                                best.front().raw_cos};
    }
  });
  return pairs;
}

PairSets build_labeled_pairs(const QuerySet& queries, const Qrels& qrels,
                             const EmbeddingStore& store) {
  PairSets pairs;
  for (const auto& [qid, positives] : qrels.entries) {
    auto qi = queries.find(qid);
    if (!qi) throw Error(ErrorCode::kMissingQrels, "qrels reference unknown query '" + qid + "'");
    for (const auto& item_id : positives) {
      auto row = store.find(item_id);
      if (!row) throw Error(ErrorCode::kUnknownItem, "unknown positive item '" + item_id + "'");
      const Modality m = store.modality(*row);
      pairs[index_of(m)].push_back(
          {qid, item_id, m, cosine(queries.vector(*qi), store.vector(*row))});
    }
  }
  return pairs;
}

void verify_pair_scores(const PairSets& pairs, const QuerySet& queries,
                        const EmbeddingStore& store, double tolerance) {
  for (Modality m : kModalities) {
    for (const auto& p : pairs[index_of(m)]) {
      auto qi = queries.find(p.query_id);
      if (!qi) throw Error(ErrorCode::kInconsistentPair, "pair references unknown query '" + p.query_id + "'");
      auto row = store.find(p.item_id);
      if (!row) throw Error(ErrorCode::kUnknownItem, "pair references unknown item '" + p.item_id + "'");
      if (store.modality(*row) != m) {
        throw Error(ErrorCode::kInconsistentPair, "item '" + p.item_id + "' is not of modality " +
                                                      std::string(to_string(m)));
      }
      const double recomputed = cosine(queries.vector(*qi), store.vector(*row));
      if (!(std::fabs(recomputed - p.score) <= tolerance)) {
        throw Error(ErrorCode::kInconsistentPair,
                    "score for (" + p.query_id + ", " + p.item_id + ") differs from recomputed cosine");
      }
    }
  }
}

const ModalityStats& StatsBundle::at(Modality m) const {
  const auto& s = per_modality[index_of(m)];
  if (!s) {
    throw Error(ErrorCode::kMissingModalityStats,
                "no statistics for modality '" + std::string(to_string(m)) + "'");
  }
  return *s;
}

ModalityStats estimate_modality_stats(std::span<const double> scores, VarianceDivisor divisor) {
  if (scores.size() < kMinPairs) {
    throw Error(ErrorCode::kTooFewPairs,
                "need at least 2 pairs, got " + std::to_string(scores.size()));
  }
  const double n = static_cast<double>(scores.size());
  const double mean = compensated_sum(scores) / n;
  CompensatedSum sq;
  for (double x : scores) {
    const double d = x - mean;
    sq.add(d * d);
  }
  const double denom = divisor == VarianceDivisor::kPopulation ? n : n - 1.0;
  ModalityStats stats;
  stats.mean = mean;
  stats.variance = sq.value() / denom;
  stats.std = std::sqrt(stats.variance);
  stats.count = scores.size();
  if (!(stats.std >= kMinStd)) {
    throw Error(ErrorCode::kDegenerateStats,
                "standard deviation " + std::to_string(stats.std) + " is below 1e-6");
  }
  return stats;
}

StatsBundle estimate_stats(const PairSets& pairs, PairSource source, std::string store_fingerprint,
                           VarianceDivisor divisor) {
  StatsBundle bundle;
  bundle.source = source;
  bundle.store_fingerprint = std::move(store_fingerprint);
  for (Modality m : kModalities) {
    const auto& list = pairs[index_of(m)];
    std::vector<double> scores;
    scores.reserve(list.size());
    for (const auto& p : list) scores.push_back(p.score);
    try {
      bundle.per_modality[index_of(m)] = estimate_modality_stats(scores, divisor);
    } catch (const Error& e) {
      throw Error(e.code(), std::string(to_string(m)) + " pairs: " + e.what());
    }
  }
  return bundle;
}

double standardize(double raw_cos, const StatsBundle& stats, Modality m) {
  const ModalityStats& s = stats.at(m);
  return (raw_cos - s.mean) / s.std;
}

namespace {

struct Ranked {
  double key;
  Modality modality;
  std::uint32_t row;
  double raw;
  double std_score;
};

bool ranks_before(const Ranked& a, const Ranked& b) {
  if (a.key != b.key) return a.key > b.key;
  if (a.modality != b.modality) return a.modality < b.modality;
  return a.row < b.row;
}

}  // namespace

std::vector<ScoredCandidate> retrieve(std::span<const float> query, const EmbeddingStore& store,
                                      std::size_t k, ScoreMethod method,
                                      const StatsBundle* stats) {
  if (store.empty()) throw Error(ErrorCode::kEmptyStore, "cannot retrieve from an empty store");
  if (method == ScoreMethod::kStd && stats == nullptr) {
    throw Error(ErrorCode::kMissingStats, "standardized retrieval requires a stats bundle");
  }
  if (query.size() != store.dim()) {
    throw Error(ErrorCode::kDimMismatch, "query dimension " + std::to_string(query.size()) +
                                             " does not match store dimension " +
                                             std::to_string(store.dim()));
  }
  if (k == 0) return {};

  // Standardization is strictly increasing within a modality, so each
  // modality's top-k under its own key contains the global top-k members.
  std::vector<Ranked> merged;
  for (Modality m : kModalities) {
    const ModalityView view = store.view(m);
    if (view.empty()) continue;
    const std::vector<double> raw = all_scores(query, view);
    std::vector<double> key = raw;
    if (method == ScoreMethod::kStd) {
      const ModalityStats& s = stats->at(m);
      for (double& x : key) x = (x - s.mean) / s.std;
    }
    const std::size_t before = merged.size();
    for (std::uint32_t pos : select_top_k(key, k)) {
      merged.push_back({key[pos], m, view.row(pos), raw[pos], key[pos]});
    }
    std::inplace_merge(merged.begin(), merged.begin() + static_cast<std::ptrdiff_t>(before),
                       merged.end(), ranks_before);
  }
  if (merged.size() > k) merged.resize(k);

  std::vector<ScoredCandidate> out;
  out.reserve(merged.size());
  for (const Ranked& r : merged) {
    ScoredCandidate c{store.id(r.row), r.modality, r.raw, std::nullopt};
    if (method == ScoreMethod::kStd) c.std_score = r.std_score;
    out.push_back(std::move(c));
  }
  return out;
}

RankedRun retrieve_all(const QuerySet& queries, const EmbeddingStore& store, std::size_t k,
                       ScoreMethod method, const StatsBundle* stats, unsigned threads) {
  std::vector<std::vector<ScoredCandidate>> lists(queries.size());
  parallel_for(queries.size(), threads, [&](std::size_t qi) {
    lists[qi] = retrieve(queries.vector(qi), store, k, method, stats);
  });
  RankedRun run;
  run.method = method;
  run.k = k;
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    run.per_query.emplace(queries.id(qi), std::move(lists[qi]));
  }
  return run;
}

}  // namespace gapbridge
