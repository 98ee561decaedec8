#include "gapbridge/formats.hpp"

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <set>
#include <sstream>

#include "gapbridge/error.hpp"
#include "io_util.hpp"

namespace gapbridge {

namespace fs = std::filesystem;
using nlohmann::json;

void write_json(const ordered_json& doc, const fs::path& path) {
  detail::write_file(path, doc.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// pairs

void write_pairs(const PairSets& pairs, const fs::path& path) {
  std::vector<const PseudoPair*> all;
  for (const auto& list : pairs) {
    for (const auto& p : list) all.push_back(&p);
  }
  std::stable_sort(all.begin(), all.end(), [](const PseudoPair* a, const PseudoPair* b) {
    if (a->query_id != b->query_id) return a->query_id < b->query_id;
    return a->modality < b->modality;
  });
  std::string out;
  for (const PseudoPair* p : all) {
    ordered_json row;
    row["query_id"] = p->query_id;
    row["item_id"] = p->item_id;
    row["modality"] = std::string(to_string(p->modality));
    row["score"] = p->score;
    out += row.dump();
    out += '\n';
  }
  detail::write_file(path, out);
}

PairSets read_pairs(const fs::path& path) {
  PairSets pairs;
  for (const json& row : detail::read_jsonl(path, ErrorCode::kMalformedInput)) {
    const json& qid = detail::require(row, "query_id", ErrorCode::kMalformedInput);
    const json& item = detail::require(row, "item_id", ErrorCode::kMalformedInput);
    const json& modality = detail::require(row, "modality", ErrorCode::kMalformedInput);
    const json& score = detail::require(row, "score", ErrorCode::kMalformedInput);
    if (!qid.is_string() || !item.is_string() || !modality.is_string() || !score.is_number()) {
      throw Error(ErrorCode::kMalformedInput, "malformed pair row in " + path.string());
    }
    Modality m;
    try {
      m = parse_modality(modality.get<std::string>());
    } catch (const Error& e) {
      throw Error(ErrorCode::kMalformedInput, e.what());
    }
    pairs[index_of(m)].push_back(
        {qid.get<std::string>(), item.get<std::string>(), m, score.get<double>()});
  }
  return pairs;
}

// ---------------------------------------------------------------------------
// stats

ordered_json stats_to_json(const StatsBundle& stats, const ordered_json& config) {
  ordered_json doc;
  doc["format"] = std::string(kStatsFormat);
  doc["source"] = std::string(to_string(stats.source));
  doc["store_fingerprint"] = stats.store_fingerprint;
  for (Modality m : kModalities) {
    const ModalityStats& s = stats.at(m);
    ordered_json block;
    block["mean"] = s.mean;
    block["std"] = s.std;
    block["variance"] = s.variance;
    block["count"] = s.count;
    doc[std::string(to_string(m))] = block;
  }
  if (!config.is_null()) doc["config"] = config;
  return doc;
}

void write_stats(const StatsBundle& stats, const fs::path& path, const ordered_json& config) {
  write_json(stats_to_json(stats, config), path);
}

StatsBundle read_stats(const fs::path& path) {
  const json doc = json::parse(detail::read_file(path), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(ErrorCode::kMalformedInput, path.string() + " is not a JSON object");
  }
  const json& format = detail::require(doc, "format", ErrorCode::kMalformedInput);
  if (!format.is_string() || format.get<std::string>() != kStatsFormat) {
    throw Error(ErrorCode::kMalformedInput, "unsupported stats format in " + path.string());
  }
  StatsBundle stats;
  const json& source = detail::require(doc, "source", ErrorCode::kMalformedInput);
  const json& fingerprint = detail::require(doc, "store_fingerprint", ErrorCode::kMalformedInput);
  if (!source.is_string() || !fingerprint.is_string()) {
    throw Error(ErrorCode::kMalformedInput, "malformed stats header in " + path.string());
  }
  try {
    stats.source = parse_pair_source(source.get<std::string>());
  } catch (const Error& e) {
    throw Error(ErrorCode::kMalformedInput, e.what());
  }
  stats.store_fingerprint = fingerprint.get<std::string>();

  for (Modality m : kModalities) {
    const std::string key(to_string(m));
    auto it = doc.find(key);
    if (it == doc.end() || it->is_null()) {
      throw Error(ErrorCode::kMissingModalityStats, "stats file lacks '" + key + "' block");
    }
    const json& block = *it;
    if (!block.is_object()) throw Error(ErrorCode::kMalformedInput, "'" + key + "' must be an object");
    const json& mean = detail::require(block, "mean", ErrorCode::kMalformedInput);
    const json& sd = detail::require(block, "std", ErrorCode::kMalformedInput);
    const json& var = detail::require(block, "variance", ErrorCode::kMalformedInput);
    const json& count = detail::require(block, "count", ErrorCode::kMalformedInput);
    if (!mean.is_number() || !sd.is_number() || !var.is_number() || !count.is_number_unsigned()) {
      throw Error(ErrorCode::kMalformedInput, "malformed '" + key + "' statistics");
    }
    ModalityStats s{mean.get<double>(), sd.get<double>(), var.get<double>(),
                    count.get<std::size_t>()};
    if (!(s.std >= kMinStd) || s.count < kMinPairs) {
      throw Error(ErrorCode::kDegenerateStats, "'" + key + "' statistics are degenerate");
    }
    stats.per_modality[index_of(m)] = s;
  }
  return stats;
}

// ---------------------------------------------------------------------------
// runs

void write_run(const RankedRun& run, const fs::path& path) {
  std::string out;
  for (const auto& [qid, ranking] : run.per_query) {
    ordered_json row;
    row["query_id"] = qid;
    ordered_json list = ordered_json::array();
    for (const auto& c : ranking) {
      ordered_json cand;
      cand["item_id"] = c.item_id;
      cand["modality"] = std::string(to_string(c.modality));
      cand["raw_cos"] = c.raw_cos;
      cand["std_score"] = c.std_score ? ordered_json(*c.std_score) : ordered_json(nullptr);
      list.push_back(std::move(cand));
    }
    row["ranking"] = std::move(list);
    row["method"] = std::string(to_string(run.method));
    row["k"] = run.k;
    out += row.dump();
    out += '\n';
  }
  detail::write_file(path, out);
}

std::vector<RankedRun> read_runs(const fs::path& path) {
  std::array<std::optional<RankedRun>, 2> by_method;
  for (const json& row : detail::read_jsonl(path, ErrorCode::kBadRun)) {
    const json& qid = detail::require(row, "query_id", ErrorCode::kBadRun);
    const json& ranking = detail::require(row, "ranking", ErrorCode::kBadRun);
    const json& method = detail::require(row, "method", ErrorCode::kBadRun);
    const json& k = detail::require(row, "k", ErrorCode::kBadRun);
    if (!qid.is_string() || !ranking.is_array() || !method.is_string() || !k.is_number_unsigned()) {
      throw Error(ErrorCode::kBadRun, "malformed run row in " + path.string());
    }
    ScoreMethod sm;
    try {
      sm = parse_score_method(method.get<std::string>());
    } catch (const Error& e) {
      throw Error(ErrorCode::kBadRun, e.what());
    }
    auto& slot = by_method[static_cast<std::size_t>(sm)];
    if (!slot) {
      slot.emplace();
      slot->method = sm;
      slot->k = k.get<std::size_t>();
    } else if (slot->k != k.get<std::size_t>()) {
      throw Error(ErrorCode::kBadRun, "mixed k values for method " + method.get<std::string>());
    }
    if (ranking.size() > slot->k) {
      throw Error(ErrorCode::kBadRun, "ranking for '" + qid.get<std::string>() + "' exceeds k");
    }
    std::vector<ScoredCandidate> list;
    std::set<std::string> seen;
    for (const json& c : ranking) {
      if (!c.is_object()) throw Error(ErrorCode::kBadRun, "ranking entries must be objects");
      const json& item = detail::require(c, "item_id", ErrorCode::kBadRun);
      const json& mod = detail::require(c, "modality", ErrorCode::kBadRun);
      const json& raw = detail::require(c, "raw_cos", ErrorCode::kBadRun);
      if (!item.is_string() || !mod.is_string() || !raw.is_number()) {
        throw Error(ErrorCode::kBadRun, "malformed ranking entry for '" + qid.get<std::string>() + "'");
      }
      ScoredCandidate cand;
      cand.item_id = item.get<std::string>();
      try {
        cand.modality = parse_modality(mod.get<std::string>());
      } catch (const Error& e) {
        throw Error(ErrorCode::kBadRun, e.what());
      }
      cand.raw_cos = raw.get<double>();
      auto it = c.find("std_score");
      if (it != c.end() && !it->is_null()) {
        if (!it->is_number()) throw Error(ErrorCode::kBadRun, "std_score must be a number or null");
        cand.std_score = it->get<double>();
      }
      if (!seen.insert(cand.item_id).second) {
        throw Error(ErrorCode::kBadRun, "duplicate item '" + cand.item_id + "' in ranking of '" +
                                            qid.get<std::string>() + "'");
      }
      list.push_back(std::move(cand));
    }
    if (!slot->per_query.emplace(qid.get<std::string>(), std::move(list)).second) {
      throw Error(ErrorCode::kBadRun, "query '" + qid.get<std::string>() + "' appears twice");
    }
  }
  std::vector<RankedRun> runs;
  for (auto& slot : by_method) {
    if (slot) runs.push_back(std::move(*slot));
  }
  if (runs.empty()) throw Error(ErrorCode::kBadRun, path.string() + " contains no rankings");
  return runs;
}

// ---------------------------------------------------------------------------
// reports

namespace {

ordered_json metrics_json(const QueryMetrics& m) {
  ordered_json j;
  j["recall"] = m.recall;
  j["mrr"] = m.mrr;
  j["ndcg"] = m.ndcg;
  return j;
}

}  // namespace

ordered_json report_to_json(const std::vector<MetricReport>& reports, const ordered_json& config) {
  ordered_json doc;
  doc["format"] = std::string(kReportFormat);
  if (!config.is_null()) doc["config"] = config;
  doc["recall_mode"] =
      std::string(to_string(reports.empty() ? RecallMode::kFraction : reports.front().recall_mode));
  ordered_json methods = ordered_json::object();
  for (ScoreMethod method : {ScoreMethod::kCos, ScoreMethod::kStd}) {
    ordered_json at = ordered_json::object();
    for (const auto& r : reports) {
      if (r.method != method) continue;
      ordered_json block;
      ordered_json groups = ordered_json::object();
      for (const auto& [name, g] : r.groups) {
        ordered_json gj = metrics_json(g.mean);
        gj["count"] = g.count;
        groups[name] = std::move(gj);
      }
      block["groups"] = std::move(groups);
      ordered_json per_query = ordered_json::object();
      for (const auto& [qid, m] : r.per_query) per_query[qid] = metrics_json(m);
      block["per_query"] = std::move(per_query);
      at[std::to_string(r.k)] = std::move(block);
    }
    if (!at.empty()) methods[std::string(to_string(method))] = std::move(at);
  }
  doc["methods"] = std::move(methods);
  return doc;
}

std::string format_report_table(const std::vector<MetricReport>& reports) {
  std::set<std::size_t> ks;
  std::set<std::string, std::less<>> seen_groups;
  for (const auto& r : reports) {
    ks.insert(r.k);
    for (const auto& [name, g] : r.groups) seen_groups.insert(name);
  }
  std::vector<std::string> columns = {"TextQ", "ImageQ"};
  if (seen_groups.contains(kUnknownGroup)) columns.emplace_back(kUnknownGroup);
  columns.emplace_back(kOverallGroup);

  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  for (std::size_t k : ks) {
    os << "@" << k << "\n";
    os << std::left << std::setw(8) << "Method";
    const MetricReport* first = nullptr;
    for (const auto& r : reports) {
      if (r.k == k) {
        first = &r;
        break;
      }
    }
    for (const auto& c : columns) {
      auto it = first->groups.find(c);
      const std::size_t n = it == first->groups.end() ? 0 : it->second.count;
      os << "| " << std::setw(23) << (c + " (n=" + std::to_string(n) + ")") << ' ';
    }
    os << "\n" << std::setw(8) << "";
    for (std::size_t i = 0; i < columns.size(); ++i) {
      os << "| " << std::right << std::setw(7) << "Recall" << std::setw(8) << "MRR" << std::setw(8)
         << "NDCG" << ' ' << std::left;
    }
    os << "\n";
    for (const auto& r : reports) {
      if (r.k != k) continue;
      os << std::left << std::setw(8) << to_string(r.method);
      for (const auto& c : columns) {
        auto it = r.groups.find(c);
        os << "| " << std::right;
        if (it == r.groups.end() || it->second.count == 0) {
          os << std::setw(7) << "-" << std::setw(8) << "-" << std::setw(8) << "-";
        } else {
          os << std::setw(7) << it->second.mean.recall << std::setw(8) << it->second.mean.mrr
             << std::setw(8) << it->second.mean.ndcg;
        }
        os << ' ' << std::left;
      }
      os << "\n";
    }
    os << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// diagnostics

namespace {

std::string csv_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

ordered_json skewness_to_json(const SkewnessSummary& summary, const ordered_json& config) {
  ordered_json doc;
  if (!config.is_null()) doc["config"] = config;
  ordered_json means;
  means["text"] = summary.mean_text;
  means["image"] = summary.mean_image;
  doc["mean"] = std::move(means);
  doc["query_count"] = summary.per_query.size();
  ordered_json rows = ordered_json::array();
  for (const auto& r : summary.per_query) {
    ordered_json row;
    row["query_id"] = r.query_id;
    row["text"] = r.text;
    row["image"] = r.image;
    rows.push_back(std::move(row));
  }
  doc["per_query"] = std::move(rows);
  return doc;
}

std::string skewness_to_csv(const SkewnessSummary& summary) {
  std::string out = "query_id,text,image\n";
  for (const auto& r : summary.per_query) {
    out += r.query_id + "," + csv_number(r.text) + "," + csv_number(r.image) + "\n";
  }
  return out;
}

ordered_json gaps_to_json(const std::vector<ScoreGapSample>& gaps, const Histogram& hist,
                          const ordered_json& config) {
  ordered_json doc;
  if (!config.is_null()) doc["config"] = config;
  doc["lo"] = hist.lo;
  doc["hi"] = hist.hi;
  doc["edges"] = hist.edges;
  doc["counts"] = hist.counts;
  doc["underflow"] = hist.underflow;
  doc["overflow"] = hist.overflow;
  doc["total"] = hist.total();
  ordered_json samples = ordered_json::array();
  for (const auto& g : gaps) {
    ordered_json row;
    row["query_id"] = g.query_id;
    row["gap"] = g.gap;
    samples.push_back(std::move(row));
  }
  doc["samples"] = std::move(samples);
  return doc;
}

std::string gaps_to_csv(const std::vector<ScoreGapSample>& gaps) {
  std::string out = "query_id,gap\n";
  for (const auto& g : gaps) out += g.query_id + "," + csv_number(g.gap) + "\n";
  return out;
}

ordered_json projection_to_json(const Projection2D& projection, const ordered_json& config) {
  ordered_json doc;
  if (!config.is_null()) doc["config"] = config;
  doc["singular_values"] = projection.singular_values;
  ordered_json labels = ordered_json::array();
  ordered_json coords = ordered_json::array();
  for (std::size_t i = 0; i < projection.labels.size(); ++i) {
    ordered_json l;
    l["id"] = projection.labels[i].id;
    l["role"] = std::string(to_string(projection.labels[i].role));
    labels.push_back(std::move(l));
    coords.push_back(projection.coords[i]);
  }
  doc["labels"] = std::move(labels);
  doc["coords"] = std::move(coords);
  return doc;
}

std::string projection_to_csv(const Projection2D& projection) {
  std::string out = "id,role,x,y\n";
  for (std::size_t i = 0; i < projection.labels.size(); ++i) {
    out += projection.labels[i].id + "," + std::string(to_string(projection.labels[i].role)) +
           "," + csv_number(projection.coords[i][0]) + "," + csv_number(projection.coords[i][1]) +
           "\n";
  }
  return out;
}

}  // namespace gapbridge
