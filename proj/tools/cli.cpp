#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "gapbridge/analysis.hpp"
#include "gapbridge/calibration.hpp"
#include "gapbridge/embedding_store.hpp"
#include "gapbridge/error.hpp"
#include "gapbridge/evaluation.hpp"
#include "gapbridge/formats.hpp"
#include "gapbridge/numeric.hpp"
#include "gapbridge/synth.hpp"

namespace gapbridge::cli {

namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Output locations and worker counts never change results, so they are kept
// out of the echoed config to keep artifacts byte-identical.
const std::set<std::string> kNotEchoed = {"help", "config", "threads", "out", "csv", "table"};

ordered_json echo_config(const CLI::App& cmd, const std::string& command) {
  ordered_json cfg;
  cfg["command"] = command;
  for (const CLI::Option* opt : cmd.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    if (kNotEchoed.contains(name)) continue;
    if (opt->count() > 0) {
      const auto& res = opt->results();
      if (opt->get_expected_max() <= 1 && res.size() == 1) {
        cfg[name] = res.front();
      } else {
        cfg[name] = res;
      }
    } else {
      const std::string def = opt->get_default_str();
      cfg[name] = def.empty() ? ordered_json(nullptr) : ordered_json(def);
    }
  }
  return cfg;
}

void write_sidecar(const ordered_json& cfg, const fs::path& artifact) {
  write_json(cfg, fs::path(artifact.string() + ".config.json"));
}

std::optional<QueryType> parse_qtype_filter(const std::string& s) {
  if (s == "all") return std::nullopt;
  return parse_query_type(s);
}

void check_dims(const QuerySet& queries, const EmbeddingStore& store) {
  if (!queries.empty() && queries.dim() != store.dim()) {
    throw Error(ErrorCode::kDimMismatch, "query dimension " + std::to_string(queries.dim()) +
                                             " does not match store dimension " +
                                             std::to_string(store.dim()));
  }
}

// ---------------------------------------------------------------------------

struct IngestArgs {
  std::string meta, vectors, out, kind = "auto";
  std::size_t dim = 0;
};

void cmd_ingest(const IngestArgs& a, const ordered_json& cfg, std::ostream& out) {
  const std::vector<float> raw = read_f32le(a.vectors);
  bool items = a.kind == "store";
  if (a.kind == "auto") items = meta_declares_modality(a.meta);

  auto resolve_dim = [&](std::size_t count) {
    if (count == 0) throw Error(ErrorCode::kMalformedInput, "metadata file is empty");
    if (raw.size() % count != 0) {
      throw Error(ErrorCode::kDimMismatch, "vector file holds " + std::to_string(raw.size()) +
                                               " values, not a multiple of " +
                                               std::to_string(count) + " rows");
    }
    const std::size_t dim = raw.size() / count;
    if (a.dim != 0 && a.dim != dim) {
      throw Error(ErrorCode::kDimMismatch, "--dim " + std::to_string(a.dim) +
                                               " but vector file implies " + std::to_string(dim));
    }
    return dim;
  };

  if (items) {
    auto meta = read_item_meta(a.meta);
    const std::size_t dim = resolve_dim(meta.size());
    EmbeddingStore store = ingest(std::move(meta), raw, dim, a.out);
    write_json(cfg, fs::path(a.out) / "config.json");
    out << "ingested " << store.size() << " items (text=" << store.view(Modality::kText).size()
        << ", image=" << store.view(Modality::kImage).size() << ", dim=" << store.dim()
        << ") into " << a.out << "\n";
  } else {
    auto meta = read_query_meta(a.meta);
    const std::size_t dim = resolve_dim(meta.size());
    QuerySet queries = ingest_queries(std::move(meta), raw, dim, a.out);
    write_json(cfg, fs::path(a.out) / "config.json");
    out << "ingested " << queries.size() << " queries (dim=" << queries.dim() << ") into " << a.out
        << "\n";
  }
}

void cmd_gen_synth(const SynthConfig& c, const std::string& out_dir, const ordered_json& cfg,
                   std::ostream& out) {
  const SynthDataset data = generate_synthetic(c);
  const fs::path root(out_dir);
  write_store(data.store, root / "store");
  write_queries(data.queries, root / "queries");
  write_queries(data.calib_queries, root / "calib_queries");
  write_qrels(data.qrels, root / "qrels.jsonl");
  write_qrels(data.calib_qrels, root / "calib_qrels.jsonl");
  write_json(cfg, root / "config.json");
  out << "wrote synthetic corpus: " << data.store.size() << " items, " << data.queries.size()
      << " queries, " << data.calib_queries.size() << " calibration queries to " << out_dir
      << "\n";
}

struct PairsArgs {
  std::string queries, store, out;
};

void cmd_pseudo_pairs(const PairsArgs& a, unsigned threads, const ordered_json& cfg,
                      std::ostream& out) {
  const EmbeddingStore store = load_store(a.store);
  const QuerySet queries = load_queries(a.queries);
  check_dims(queries, store);
  const PairSets pairs = build_pseudo_pairs(queries, store, threads);
  write_pairs(pairs, a.out);
  write_sidecar(cfg, a.out);
  out << "wrote " << pairs[0].size() + pairs[1].size() << " pseudo pairs to " << a.out << "\n";
}

struct StatsArgs {
  std::string pairs, source = "pseudo", store, out, qrels, queries, divisor = "n";
};

// The query set the pairs were built from: --queries, else the path echoed in
// the pairs sidecar.
std::optional<std::string> calibration_queries_of(const StatsArgs& a) {
  if (!a.queries.empty()) return a.queries;
  if (a.pairs.empty()) return std::nullopt;
  const fs::path sidecar(a.pairs + ".config.json");
  if (!fs::exists(sidecar)) return std::nullopt;
  std::ifstream f(sidecar);
  const auto doc = ordered_json::parse(f, nullptr, false);
  if (doc.is_object() && doc.contains("queries") && doc["queries"].is_string()) {
    return doc["queries"].get<std::string>();
  }
  return std::nullopt;
}

bool same_path(const std::string& a, const std::string& b) {
  std::error_code ec1, ec2;
  const auto ca = fs::weakly_canonical(a, ec1);
  const auto cb = fs::weakly_canonical(b, ec2);
  return !ec1 && !ec2 && ca == cb;
}

void cmd_estimate_stats(const StatsArgs& a, const ordered_json& cfg, std::ostream& out) {
  const PairSource source = parse_pair_source(a.source);
  const EmbeddingStore store = load_store(a.store);
  PairSets pairs;
  std::optional<QuerySet> queries;
  if (!a.queries.empty()) {
    queries = load_queries(a.queries);
    check_dims(*queries, store);
  }
  if (source == PairSource::kLabeled && !a.qrels.empty()) {
    if (!queries) throw UsageError("--source labeled with --qrels also needs --queries");
    const Qrels qrels = load_qrels(a.qrels);
    validate_qrels(qrels, store);
    pairs = build_labeled_pairs(*queries, qrels, store);
  } else {
    if (a.pairs.empty()) {
      throw UsageError(source == PairSource::kPseudo
                           ? "--source pseudo needs --pairs"
                           : "--source labeled needs --pairs or --qrels with --queries");
    }
    pairs = read_pairs(a.pairs);
    if (queries) verify_pair_scores(pairs, *queries, store);
  }
  const VarianceDivisor divisor =
      a.divisor == "n-1" ? VarianceDivisor::kSample : VarianceDivisor::kPopulation;
  const StatsBundle stats = estimate_stats(pairs, source, store.fingerprint(), divisor);
  ordered_json full_cfg = cfg;
  if (const auto calib = calibration_queries_of(a); calib) full_cfg["calibration_queries"] = *calib;
  write_stats(stats, a.out, full_cfg);
  const auto& t = stats.at(Modality::kText);
  const auto& i = stats.at(Modality::kImage);
  out << "text: mean=" << t.mean << " std=" << t.std << " (n=" << t.count << ")\n"
      << "image: mean=" << i.mean << " std=" << i.std << " (n=" << i.count << ")\n";
}

struct RetrieveArgs {
  std::string queries, store, method = "cos", stats, out;
  std::size_t k = 100;
};

void cmd_retrieve(const RetrieveArgs& a, unsigned threads, const ordered_json& cfg,
                  std::ostream& out) {
  const ScoreMethod method = parse_score_method(a.method);
  const EmbeddingStore store = load_store(a.store);
  const QuerySet queries = load_queries(a.queries);
  check_dims(queries, store);
  std::optional<StatsBundle> stats;
  if (method == ScoreMethod::kStd) {
    stats = read_stats(a.stats);
    std::ifstream f(a.stats);
    const auto doc = ordered_json::parse(f, nullptr, false);
    if (doc.is_object() && doc.contains("config") && doc["config"].is_object()) {
      const auto& c = doc["config"];
      if (c.contains("calibration_queries") && c["calibration_queries"].is_string() &&
          same_path(c["calibration_queries"].get<std::string>(), a.queries)) {
        throw Error(ErrorCode::kBadConfig,
                    "evaluation queries are the calibration split the stats were built from");
      }
    }
    if (stats->store_fingerprint != store.fingerprint()) {
      throw Error(ErrorCode::kStatsMismatch,
                  "stats were estimated on a different store (fingerprint mismatch)");
    }
  }
  const RankedRun run =
      retrieve_all(queries, store, a.k, method, stats ? &*stats : nullptr, threads);
  write_run(run, a.out);
  write_sidecar(cfg, a.out);
  out << "ranked " << run.per_query.size() << " queries (method=" << to_string(method)
      << ", k=" << a.k << ") into " << a.out << "\n";
}

struct EvaluateArgs {
  std::vector<std::string> runs;
  std::string qrels, out, queries, table, recall_mode = "fraction";
  std::vector<std::size_t> ks = {1, 5, 20, 100};
};

void cmd_evaluate(const EvaluateArgs& a, const ordered_json& cfg, std::ostream& out,
                  std::ostream& err) {
  const Qrels qrels = load_qrels(a.qrels);
  std::map<std::string, QueryType> qtypes;
  if (!a.queries.empty()) qtypes = load_queries(a.queries).qtypes();
  const RecallMode mode = parse_recall_mode(a.recall_mode);

  std::vector<MetricReport> reports;
  std::set<ScoreMethod> seen;
  for (const auto& path : a.runs) {
    for (const RankedRun& run : read_runs(path)) {
      if (!seen.insert(run.method).second) {
        throw Error(ErrorCode::kBadRun, "method '" + std::string(to_string(run.method)) +
                                            "' appears in more than one run");
      }
      for (std::size_t k : a.ks) {
        if (k > run.k) {
          err << "warning: evaluating @" << k << " on a " << to_string(run.method)
              << " run truncated at k=" << run.k << "\n";
        }
        reports.push_back(evaluate_run(run, qrels, qtypes, k, mode));
      }
    }
  }
  std::stable_sort(reports.begin(), reports.end(), [](const MetricReport& x, const MetricReport& y) {
    return x.k != y.k ? x.k < y.k : x.method < y.method;
  });
  write_json(report_to_json(reports, cfg), a.out);
  const std::string table = format_report_table(reports);
  fs::path table_path = a.table.empty() ? fs::path(a.out).replace_extension(".txt") : fs::path(a.table);
  {
    std::ofstream t(table_path, std::ios::binary | std::ios::trunc);
    if (!t) throw Error(ErrorCode::kIo, "cannot create " + table_path.string());
    t << table;
  }
  out << table;
}

struct AnalyzeArgs {
  std::string queries, store, stats, qrels, out, csv, qtype = "all";
  std::size_t bins = kGapHistogramBins;
  double lo = kGapHistogramLo;
  double hi = kGapHistogramHi;
};

void write_csv(const std::string& path, const std::string& contents) {
  if (path.empty()) return;
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIo, "cannot create " + path);
  f << contents;
}

void cmd_analyze_skewness(const AnalyzeArgs& a, unsigned threads, const ordered_json& cfg,
                          std::ostream& out) {
  const EmbeddingStore store = load_store(a.store);
  const QuerySet queries = load_queries(a.queries);
  check_dims(queries, store);
  const auto summary = skewness_by_query(queries, store, parse_qtype_filter(a.qtype), threads);
  write_json(skewness_to_json(summary, cfg), a.out);
  write_csv(a.csv, skewness_to_csv(summary));
  out << "mean skewness over " << summary.per_query.size() << " queries: text=" << summary.mean_text
      << " image=" << summary.mean_image << "\n";
}

void cmd_analyze_gap(const AnalyzeArgs& a, unsigned threads, const ordered_json& cfg,
                     std::ostream& out) {
  const EmbeddingStore store = load_store(a.store);
  const QuerySet queries = load_queries(a.queries);
  check_dims(queries, store);
  const StatsBundle stats = read_stats(a.stats);
  const auto gaps = score_gaps(queries, store, stats, parse_qtype_filter(a.qtype), threads);
  std::vector<double> values;
  values.reserve(gaps.size());
  for (const auto& g : gaps) values.push_back(g.gap);
  const Histogram hist = histogram(values, a.bins, a.lo, a.hi);
  write_json(gaps_to_json(gaps, hist, cfg), a.out);
  write_csv(a.csv, gaps_to_csv(gaps));
  out << "score gaps for " << gaps.size() << " queries, mean=" << compensated_mean(values) << "\n";
}

void cmd_analyze_svd(const AnalyzeArgs& a, const ordered_json& cfg, std::ostream& out) {
  const EmbeddingStore store = load_store(a.store);
  const QuerySet queries = load_queries(a.queries);
  check_dims(queries, store);
  const Qrels qrels = load_qrels(a.qrels);
  const Projection2D proj =
      project_queries_and_positives(queries, qrels, store, parse_qtype_filter(a.qtype));
  write_json(projection_to_json(proj, cfg), a.out);
  write_csv(a.csv, projection_to_csv(proj));
  out << "projected " << proj.labels.size() << " points; singular values "
      << proj.singular_values[0] << ", " << proj.singular_values[1] << "\n";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Modality-calibrated multi-modal dense retrieval toolkit"};
  app.name("gapbridge");
  app.set_config("--config", "", "TOML config file; command-line flags take precedence");
  app.require_subcommand(1, 1);

  unsigned threads = 1;
  auto add_threads = [&](CLI::App* cmd) {
    cmd->add_option("--threads", threads, "Worker threads (0 = all cores); results do not depend on it")
        ->capture_default_str();
  };

  IngestArgs ingest_args;
  auto* ingest_cmd = app.add_subcommand("ingest", "Build an mbstore-v1 directory from metadata + raw float32 vectors");
  ingest_cmd->add_option("--meta", ingest_args.meta, "Metadata JSONL")->required();
  ingest_cmd->add_option("--vectors", ingest_args.vectors, "Row-major float32 little-endian matrix")->required();
  ingest_cmd->add_option("--out", ingest_args.out, "Output directory")->required();
  ingest_cmd->add_option("--dim", ingest_args.dim, "Expected dimension (inferred when 0)")->capture_default_str();
  ingest_cmd->add_option("--kind", ingest_args.kind, "store, queries, or auto (by presence of 'modality')")
      ->check(CLI::IsMember({"auto", "store", "queries"}))
      ->capture_default_str();

  SynthConfig synth;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("gen-synth", "Generate a seeded synthetic corpus with a modality gap");
  synth_cmd->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();
  synth_cmd->add_option("--dim", synth.dim, "Embedding dimension")->capture_default_str();
  synth_cmd->add_option("--n-text", synth.n_text, "Number of text items")->capture_default_str();
  synth_cmd->add_option("--n-image", synth.n_image, "Number of image items")->capture_default_str();
  synth_cmd->add_option("--n-queries", synth.n_queries, "Evaluation queries")->capture_default_str();
  synth_cmd->add_option("--n-calib-queries", synth.n_calib_queries, "Calibration (unlabeled) queries")
      ->capture_default_str();
  synth_cmd->add_option("--imageq-fraction", synth.imageq_fraction, "Share of ImageQ queries")
      ->capture_default_str();
  synth_cmd->add_option("--gap", synth.gap_offset, "Norm of the shared text offset")->capture_default_str();
  synth_cmd->add_option("--noise", synth.noise, "Within-cluster noise scale")->capture_default_str();
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();

  PairsArgs pairs_args;
  auto* pairs_cmd = app.add_subcommand("pseudo-pairs", "Pair each query with its top-1 text and top-1 image item");
  pairs_cmd->add_option("--queries", pairs_args.queries, "Calibration query set directory")->required();
  pairs_cmd->add_option("--store", pairs_args.store, "Store directory")->required();
  pairs_cmd->add_option("--out", pairs_args.out, "Output pairs JSONL")->required();
  add_threads(pairs_cmd);

  StatsArgs stats_args;
  auto* stats_cmd = app.add_subcommand("estimate-stats", "Estimate per-modality mean/std from pairs");
  stats_cmd->add_option("--pairs", stats_args.pairs, "Pairs JSONL");
  stats_cmd->add_option("--source", stats_args.source, "pseudo or labeled")
      ->check(CLI::IsMember({"pseudo", "labeled"}))
      ->capture_default_str();
  stats_cmd->add_option("--store", stats_args.store, "Store directory")->required();
  stats_cmd->add_option("--qrels", stats_args.qrels, "Qrels JSONL (labeled mode)");
  stats_cmd->add_option("--queries", stats_args.queries,
                        "Query set; builds labeled pairs or verifies pair scores");
  stats_cmd->add_option("--variance-divisor", stats_args.divisor, "n (population) or n-1")
      ->check(CLI::IsMember({"n", "n-1"}))
      ->capture_default_str();
  stats_cmd->add_option("--out", stats_args.out, "Output stats.json")->required();

  RetrieveArgs retrieve_args;
  auto* retrieve_cmd = app.add_subcommand("retrieve", "Rank the store for every query");
  retrieve_cmd->add_option("--queries", retrieve_args.queries, "Query set directory")->required();
  retrieve_cmd->add_option("--store", retrieve_args.store, "Store directory")->required();
  retrieve_cmd->add_option("--method", retrieve_args.method, "cos or std")
      ->check(CLI::IsMember({"cos", "std"}))
      ->capture_default_str();
  retrieve_cmd->add_option("--stats", retrieve_args.stats, "stats.json (required for --method std)");
  retrieve_cmd->add_option("--k", retrieve_args.k, "Candidates per query")->capture_default_str();
  retrieve_cmd->add_option("--out", retrieve_args.out, "Output run JSONL")->required();
  add_threads(retrieve_cmd);

  EvaluateArgs eval_args;
  auto* eval_cmd = app.add_subcommand("evaluate", "Recall/MRR/NDCG@k grouped by question type");
  eval_cmd->add_option("--run", eval_args.runs, "Run JSONL (repeatable)")->required();
  eval_cmd->add_option("--qrels", eval_args.qrels, "Qrels JSONL")->required();
  eval_cmd->add_option("--k", eval_args.ks, "Comma-separated cutoffs")
      ->delimiter(',')
      ->capture_default_str();
  eval_cmd->add_option("--queries", eval_args.queries, "Query set supplying TextQ/ImageQ types");
  eval_cmd->add_option("--recall-mode", eval_args.recall_mode, "fraction or any-hit")
      ->check(CLI::IsMember({"fraction", "any-hit"}))
      ->capture_default_str();
  eval_cmd->add_option("--table", eval_args.table, "Plain-text table path (default: <out>.txt)");
  eval_cmd->add_option("--out", eval_args.out, "Output report.json")->required();

  AnalyzeArgs an;
  auto* analyze_cmd = app.add_subcommand("analyze", "Similarity diagnostics");
  analyze_cmd->require_subcommand(1, 1);
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--queries", an.queries, "Query set directory")->required();
    cmd->add_option("--store", an.store, "Store directory")->required();
    cmd->add_option("--qtype", an.qtype, "TextQ, ImageQ or all")
        ->check(CLI::IsMember({"TextQ", "ImageQ", "all"}))
        ->capture_default_str();
    cmd->add_option("--out", an.out, "Output JSON")->required();
    cmd->add_option("--csv", an.csv, "Also write a flat CSV table here");
  };
  auto* skew_cmd = analyze_cmd->add_subcommand("skewness", "Skewness of per-query score distributions");
  add_common(skew_cmd);
  add_threads(skew_cmd);
  auto* gap_cmd = analyze_cmd->add_subcommand("gap", "Standardized image-minus-text mean score gaps");
  add_common(gap_cmd);
  gap_cmd->add_option("--stats", an.stats, "stats.json")->required();
  gap_cmd->add_option("--bins", an.bins, "Histogram bins")->capture_default_str();
  gap_cmd->add_option("--lo", an.lo, "Histogram lower bound")->capture_default_str();
  gap_cmd->add_option("--hi", an.hi, "Histogram upper bound")->capture_default_str();
  add_threads(gap_cmd);
  auto* svd_cmd = analyze_cmd->add_subcommand("svd", "2-D SVD projection of queries and their positives");
  add_common(svd_cmd);
  svd_cmd->add_option("--qrels", an.qrels, "Qrels JSONL")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*ingest_cmd) {
      cmd_ingest(ingest_args, echo_config(*ingest_cmd, "ingest"), out);
    } else if (*synth_cmd) {
      cmd_gen_synth(synth, synth_out, echo_config(*synth_cmd, "gen-synth"), out);
    } else if (*pairs_cmd) {
      cmd_pseudo_pairs(pairs_args, threads, echo_config(*pairs_cmd, "pseudo-pairs"), out);
    } else if (*stats_cmd) {
      cmd_estimate_stats(stats_args, echo_config(*stats_cmd, "estimate-stats"), out);
    } else if (*retrieve_cmd) {
      if (retrieve_args.method == "std" && retrieve_args.stats.empty()) {
        throw UsageError("--method std requires --stats");
      }
      cmd_retrieve(retrieve_args, threads, echo_config(*retrieve_cmd, "retrieve"), out);
    } else if (*eval_cmd) {
      if (eval_args.ks.empty() || std::find(eval_args.ks.begin(), eval_args.ks.end(), 0u) != eval_args.ks.end()) {
        throw UsageError("--k needs positive cutoffs");
      }
      cmd_evaluate(eval_args, echo_config(*eval_cmd, "evaluate"), out, err);
    } else if (*skew_cmd) {
      cmd_analyze_skewness(an, threads, echo_config(*skew_cmd, "analyze skewness"), out);
    } else if (*gap_cmd) {
      cmd_analyze_gap(an, threads, echo_config(*gap_cmd, "analyze gap"), out);
    } else if (*svd_cmd) {
      cmd_analyze_svd(an, echo_config(*svd_cmd, "analyze svd"), out);
    }
  } catch (const UsageError& e) {
    err << "gapbridge: usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "gapbridge: error[" << to_string(e.code()) << "]: " << e.what() << "\n";
    return kExitDataError;
  } catch (const std::exception& e) {
    err << "gapbridge: error[Internal]: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("gapbridge");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace gapbridge::cli
