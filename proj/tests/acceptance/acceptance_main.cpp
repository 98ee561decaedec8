// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are fixed
// here and must not be relaxed to make a run pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gapbridge/analysis.hpp"
#include "gapbridge/calibration.hpp"
#include "gapbridge/evaluation.hpp"
#include "gapbridge/formats.hpp"
#include "gapbridge/similarity.hpp"
#include "gapbridge/synth.hpp"
#include "oracles/brute_force.hpp"
#include "oracles/reference_metrics.hpp"
#include "oracles/reference_stats.hpp"
#include "oracles/reference_svd.hpp"
#include "support/test_support.hpp"

namespace fs = std::filesystem;
using namespace gapbridge;
using gapbridge::testing::Gen;
using gapbridge::testing::TempDir;

namespace {

// --- pinned tolerances -----------------------------------------------------
constexpr double kCosRecallCeiling = 5.0;
constexpr double kStdRecallFloor = 80.0;
constexpr double kRuntimeBudgetSeconds = 10.0;
constexpr double kStatsTolerance = 1e-12;
constexpr double kMetricTolerance = 1e-9;
constexpr double kSkewTolerance = 1e-9;
constexpr double kSvdTolerance = 1e-7;

struct Outcome {
  bool pass = true;
  std::string detail;
};

/// Collects the first few failure messages of a criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) notes_ += (notes_.empty() ? "" : "; ") + what;
  }
  bool ok() const { return failures_ == 0; }
  Outcome outcome(const std::string& summary) const {
    if (ok()) return {true, summary};
    return {false, summary + " | " + std::to_string(failures_) + " failure(s): " + notes_};
  }

 private:
  std::size_t failures_ = 0;
  std::string notes_;
};

std::string fmt(double x, int prec = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, x);
  return buf;
}

std::string quote(const std::string& s) { return "'" + s + "'"; }

int sh(const fs::path& cwd, const std::string& args) {
  const std::string cmd =
      "cd " + quote(cwd.string()) + " && " + quote(GAPBRIDGE_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// --- shared synthetic pipeline ----------------------------------------------

const std::vector<std::string>& pipeline_steps() {
  static const std::vector<std::string> steps = {
      "gen-synth --seed 42 --dim 64 --n-text 2000 --n-image 2000 --n-queries 400 "
      "--n-calib-queries 400 --imageq-fraction 0.5 --gap 1.2 --noise 0.6 --out syn",
      "pseudo-pairs --queries syn/calib_queries --store syn/store --out pairs.jsonl",
      "estimate-stats --pairs pairs.jsonl --source pseudo --store syn/store --out stats.json",
      "retrieve --queries syn/queries --store syn/store --method cos --k 100 --out cos.jsonl",
      "retrieve --queries syn/queries --store syn/store --method std --stats stats.json --k 100 "
      "--out std.jsonl",
      "evaluate --run cos.jsonl --run std.jsonl --qrels syn/qrels.jsonl --queries syn/queries "
      "--k 1,5,20,100 --out report.json",
      "analyze skewness --queries syn/queries --store syn/store --out skew.json --csv skew.csv",
      "analyze gap --queries syn/queries --store syn/store --stats stats.json --out gap.json "
      "--csv gap.csv",
      "analyze svd --queries syn/queries --store syn/store --qrels syn/qrels.jsonl --qtype ImageQ "
      "--out svd.json --csv svd.csv",
  };
  return steps;
}

// Steps that accept --threads.
bool threaded(const std::string& step) {
  return step.rfind("pseudo-pairs", 0) == 0 || step.rfind("retrieve", 0) == 0 ||
         step.rfind("analyze skewness", 0) == 0 || step.rfind("analyze gap", 0) == 0;
}

/// Runs the pipeline in `dir`; returns seconds spent in the retrieval-side
/// steps (everything up to and including evaluate) or -1 on failure.
double run_pipeline(const fs::path& dir, unsigned threads, std::string& error) {
  fs::create_directories(dir);
  double timed = 0.0;
  for (const auto& step : pipeline_steps()) {
    const std::string args =
        threaded(step) ? step + " --threads " + std::to_string(threads) : step;
    const auto t0 = std::chrono::steady_clock::now();
    const int code = sh(dir, args);
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (code != 0) {
      error = "step '" + step.substr(0, step.find(' ')) + "' exited " + std::to_string(code);
      return -1.0;
    }
    if (step.rfind("analyze", 0) != 0) timed += dt;
  }
  return timed;
}

struct PipelineRuns {
  PipelineRuns() { seconds_single = run_pipeline(root / "t1", 1, error); }
  TempDir root;
  double seconds_single = -1.0;
  std::string error;
};

PipelineRuns& pipeline() {
  static PipelineRuns runs;
  return runs;
}

// --- criteria -------------------------------------------------------------

Outcome synthetic_gap_recovery() {
  auto& runs = pipeline();
  if (runs.seconds_single < 0) return {false, runs.error};
  const auto report =
      nlohmann::json::parse(testing::read_text(runs.root / "t1" / "report.json"));
  Check c;
  const auto recall = [&](const char* method, int k, const char* group) {
    return report["methods"][method][std::to_string(k)]["groups"][group]["recall"].get<double>();
  };
  const std::size_t n_image_q = report["methods"]["cos"]["20"]["groups"]["ImageQ"]["count"];
  c.expect(n_image_q == 200, "ImageQ count " + std::to_string(n_image_q));
  const double cos20 = recall("cos", 20, "ImageQ");
  const double std20 = recall("std", 20, "ImageQ");
  c.expect(cos20 <= kCosRecallCeiling, "cos R@20 " + fmt(cos20));
  c.expect(std20 >= kStdRecallFloor, "std R@20 " + fmt(std20));
  for (const char* method : {"cos", "std"}) {
    for (const char* group : {"TextQ", "ImageQ", "overall"}) {
      double prev = -1.0;
      for (int k : {1, 5, 20, 100}) {
        const double r = recall(method, k, group);
        c.expect(r >= prev, std::string(method) + "/" + group + " recall drops at @" +
                                std::to_string(k));
        prev = r;
      }
    }
  }
  c.expect(1.2 >= 2 * 0.6, "gap < 2*noise");
  c.expect(runs.seconds_single < kRuntimeBudgetSeconds,
           "runtime " + fmt(runs.seconds_single) + " s");
  return c.outcome("ImageQ R@20 cos=" + fmt(cos20) + " (<=5.0), std=" + fmt(std20) +
                   " (>=80.0); recall monotone over {1,5,20,100}; single-thread runtime " +
                   fmt(runs.seconds_single) + " s");
}

Outcome top_k_oracle() {
  Gen gen(2024);
  std::vector<ItemRecord> records;
  for (std::size_t i = 0; i < 10000; ++i) {
    ItemRecord r;
    r.meta.id = (i % 2 == 0 ? "t" : "i") + std::to_string(i);
    r.meta.modality = i % 2 == 0 ? Modality::kText : Modality::kImage;
    // Every tenth item repeats an earlier vector to force exact ties.
    r.vector = (i >= 20 && i % 10 == 0) ? records[gen.below(i / 2) * 2 + (i % 2)].vector
                                        : gen.gaussian_vector(64);
    records.push_back(std::move(r));
  }
  const auto store = EmbeddingStore::from_records(std::move(records));
  Check c;
  std::size_t compared = 0;
  for (std::size_t q = 0; q < 100; ++q) {
    const auto query = gen.gaussian_vector(64);
    const auto qs = QuerySet::from_records({{{"q", {}, {}}, query}});
    const auto qv = qs.vector(0);
    for (std::size_t k : {1, 5, 20, 100}) {
      for (Modality m : kModalities) {
        std::vector<std::string> got;
        for (const auto& cand : top_k(qv, store.view(m), k)) got.push_back(cand.item_id);
        c.expect(got == oracle::top_k_ids(qv, store, m, k),
                 "query " + std::to_string(q) + " k=" + std::to_string(k));
        ++compared;
      }
      const auto merged = retrieve(qv, store, k, ScoreMethod::kCos);
      const auto want = oracle::global_sort(qv, store, k, nullptr);
      bool same = merged.size() == want.size();
      for (std::size_t i = 0; same && i < merged.size(); ++i) same = merged[i].item_id == want[i].id;
      c.expect(same, "merged cos query " + std::to_string(q) + " k=" + std::to_string(k));
      ++compared;
    }
  }
  return c.outcome(std::to_string(compared) +
                   " rankings (100 queries x k in {1,5,20,100}, 10,000 items, d=64) equal the "
                   "stable-sort oracle");
}

Outcome stats_exactness() {
  TempDir tmp;
  Check c;
  struct Family {
    std::vector<double> values;
    double mean;
    double variance;
  };
  // Closed forms: mu +- sigma alternating; arithmetic progression; two-point mixture.
  auto alternating = [](double mu, double sigma, std::size_t n) {
    Family f{{}, mu, sigma * sigma};
    for (std::size_t i = 0; i < n; ++i) f.values.push_back(i % 2 == 0 ? mu + sigma : mu - sigma);
    return f;
  };
  auto progression = [](double a, double h, std::size_t n) {
    Family f{{}, a + h * double(n - 1) / 2.0, h * h * (double(n) * double(n) - 1.0) / 12.0};
    for (std::size_t i = 0; i < n; ++i) f.values.push_back(a + h * double(i));
    return f;
  };
  auto two_point = [](double a, double b, std::size_t m, std::size_t n) {
    const double dn = double(n), dm = double(m);
    Family f{{}, (dm * a + (dn - dm) * b) / dn, dm * (dn - dm) * (b - a) * (b - a) / (dn * dn)};
    for (std::size_t i = 0; i < n; ++i) f.values.push_back(i < m ? a : b);
    return f;
  };
  std::vector<std::pair<Family, Family>> files;
  for (int i = 0; i < 25; ++i) {
    const double t = 0.01 * i;
    Family text, image;
    switch (i % 3) {
      case 0:
        text = alternating(0.841 - t, 0.058 + t / 10, 2 * (i + 1));
        image = alternating(0.315 + t, 0.023 + t / 20, 2 * (i + 2));
        break;
      case 1:
        text = progression(0.5 - t, 0.001 * (i + 1), 3 + 7 * i);
        image = two_point(0.1 + t, 0.4, 1 + i / 2, 5 + i);
        break;
      default:
        text = two_point(-0.2, 0.7 - t, 2 + i, 11 + 2 * i);
        image = progression(-0.3 + t, 0.0005 * (i + 3), 2 + 13 * i);
        break;
    }
    files.emplace_back(std::move(text), std::move(image));
  }
  double worst = 0.0;
  for (std::size_t f = 0; f < files.size(); ++f) {
    PairSets pairs;
    const auto& [text, image] = files[f];
    for (std::size_t i = 0; i < text.values.size(); ++i)
      pairs[0].push_back({"q" + std::to_string(i), "t" + std::to_string(i), Modality::kText, text.values[i]});
    for (std::size_t i = 0; i < image.values.size(); ++i)
      pairs[1].push_back({"q" + std::to_string(i), "i" + std::to_string(i), Modality::kImage, image.values[i]});
    const fs::path path = tmp / ("pairs" + std::to_string(f) + ".jsonl");
    write_pairs(pairs, path);
    const auto stats = estimate_stats(read_pairs(path), PairSource::kLabeled, "fp");
    for (auto [m, fam] : {std::pair{Modality::kText, &text}, std::pair{Modality::kImage, &image}}) {
      const auto& s = stats.at(m);
      const double dm = std::fabs(s.mean - fam->mean);
      const double dv = std::fabs(s.variance - fam->variance);
      worst = std::max({worst, dm, dv});
      c.expect(dm <= kStatsTolerance && dv <= kStatsTolerance,
               "file " + std::to_string(f) + " " + std::string(to_string(m)));
    }
  }
  const std::vector<double> divisor = {0.0, 1.0};
  const double v = estimate_modality_stats(divisor).variance;
  c.expect(v == 0.25, "variance of [0,1] = " + fmt(v, 6));
  char worst_s[32];
  std::snprintf(worst_s, sizeof worst_s, "%.2e", worst);
  return c.outcome("25 pair files match closed-form population mean/variance (max error " +
                   std::string(worst_s) + " <= 1e-12); var([0,1]) = 0.25");
}

Outcome standardization_monotonicity() {
  Check c;
  for (std::size_t d = 0; d < 1000; ++d) {
    Gen gen = Gen::for_case(9001, d);
    const std::size_t n = gen.between(2, 400);
    std::vector<double> raw(n);
    const bool quantised = gen.coin(0.5);
    for (auto& x : raw) {
      x = gen.uniform(-1.0, 1.0);
      if (quantised) x = std::round(x * 200.0) / 200.0;  // many exact ties
    }
    StatsBundle b;
    for (Modality m : kModalities) {
      const double sd = std::exp(gen.uniform(std::log(1e-6), std::log(2.0)));
      b.per_modality[index_of(m)] = ModalityStats{gen.uniform(-1.0, 1.0), sd, sd * sd, 2};
    }
    const Modality m = gen.coin() ? Modality::kText : Modality::kImage;
    std::vector<double> key(n);
    for (std::size_t i = 0; i < n; ++i) key[i] = standardize(raw[i], b, m);
    c.expect(select_top_k(raw, n) == select_top_k(key, n), "draw " + std::to_string(d));
  }
  return c.outcome("1000 (stats, score-set) draws: standardized permutation equals cosine permutation");
}

Outcome merge_correctness() {
  Check c;
  std::size_t calls = 0, largest = 0;
  for (std::size_t s = 0; s < 50; ++s) {
    Gen gen = Gen::for_case(777, s);
    const std::size_t n = s == 0 ? 5000 : gen.log_between(1, 5000);
    const std::size_t n_text = gen.between(0, n);
    const bool lattice = gen.coin(0.5);
    auto store = testing::random_store(gen, {n_text, n - n_text, 8, lattice});
    largest = std::max(largest, store.size());
    StatsBundle b;
    const double mu = gen.uniform(-0.5, 0.5), sd = gen.uniform(0.05, 1.0);
    for (Modality m : kModalities) {
      // Lattice stores share one set of stats so equal cosines tie across modalities.
      b.per_modality[index_of(m)] =
          lattice ? ModalityStats{0.25, 0.5, 0.25, 2}
                  : ModalityStats{mu + gen.uniform(-0.3, 0.3), sd * gen.uniform(0.2, 2.0), 0, 2};
    }
    const auto q = lattice ? gen.lattice_vector(8) : gen.gaussian_vector(8);
    const auto full = oracle::global_sort(q, store, store.size(), &b);
    for (std::size_t k = 0; k <= store.size() + 1; ++k) {
      const auto got = retrieve(q, store, k, ScoreMethod::kStd, &b);
      ++calls;
      const std::size_t want = std::min(k, store.size());
      bool same = got.size() == want;
      for (std::size_t i = 0; same && i < want; ++i) {
        same = got[i].item_id == full[i].id && *got[i].std_score == full[i].key &&
               got[i].raw_cos == full[i].raw;
      }
      c.expect(same, "store " + std::to_string(s) + " k=" + std::to_string(k));
    }
  }
  return c.outcome("50 stores (largest " + std::to_string(largest) + " items), " +
                   std::to_string(calls) + " retrieve(std) calls over all k equal the global sort");
}

Outcome metric_oracle() {
  Check c;
  std::size_t compared = 0;
  for (std::size_t r = 0; r < 50; ++r) {
    Gen gen = Gen::for_case(4040, r);
    RankedRun run;
    run.method = gen.coin() ? ScoreMethod::kCos : ScoreMethod::kStd;
    run.k = 100;
    Qrels qrels;
    std::map<std::string, QueryType> qtypes;
    const std::size_t n_queries = gen.between(1, 60);
    for (std::size_t q = 0; q < n_queries; ++q) {
      const std::string qid = "q" + std::to_string(q);
      std::set<std::string> pos;
      const std::size_t n_pos = gen.between(1, 5);
      while (pos.size() < n_pos) pos.insert("d" + std::to_string(gen.below(200)));
      qrels.entries[qid] = pos;
      if (!gen.coin(0.1)) qtypes[qid] = gen.coin() ? QueryType::kTextQ : QueryType::kImageQ;
      std::set<std::string> used;
      const std::size_t len = gen.between(0, 100);
      while (used.size() < len) {
        std::string id = "d" + std::to_string(gen.below(200));
        if (used.insert(id).second) run.per_query[qid].push_back({id, Modality::kText, 0.0, {}});
      }
    }
    for (std::size_t k : {1, 5, 20, 100}) {
      const auto report = evaluate_run(run, qrels, qtypes, k);
      std::map<std::string, std::vector<double>> recall_by_group;
      for (const auto& [qid, ranking] : run.per_query) {
        const auto ids = ranked_ids(ranking);
        const std::vector<std::string> pos(qrels.entries[qid].begin(), qrels.entries[qid].end());
        const auto& m = report.per_query.at(qid);
        c.expect(std::fabs(m.recall - oracle::recall(ids, pos, k)) <= kMetricTolerance, "recall");
        c.expect(std::fabs(m.mrr - oracle::mrr(ids, pos, k)) <= kMetricTolerance, "mrr");
        c.expect(std::fabs(m.ndcg - oracle::ndcg(ids, pos, k)) <= kMetricTolerance, "ndcg");
        const auto qt = qtypes.find(qid);
        recall_by_group[qt == qtypes.end() ? "unknown" : std::string(to_string(qt->second))]
            .push_back(oracle::recall(ids, pos, k));
        recall_by_group["overall"].push_back(oracle::recall(ids, pos, k));
        compared += 3;
      }
      for (const auto& [group, values] : recall_by_group) {
        const double mean = oracle::moments(values).mean;
        c.expect(std::fabs(report.groups.at(group).mean.recall - mean) <= kMetricTolerance,
                 "group " + group);
      }
    }
  }
  const std::vector<std::string> ranked = {"a", "b", "g", "c"};
  const std::vector<std::string> ranked4 = {"a", "b", "c", "g"};
  const double ndcg = ndcg_at_k(ranked, {"g"}, 20);
  const double mrr = mrr_at_k(ranked4, {"g"}, 20);
  c.expect(ndcg == 50.0, "rank-3 NDCG@20 = " + fmt(ndcg, 12));
  c.expect(mrr == 25.0, "rank-4 MRR = " + fmt(mrr, 12));
  return c.outcome(std::to_string(compared) +
                   " per-query metrics over 50 runs within 1e-9 of the reference; rank-3 "
                   "NDCG@20 = " + fmt(ndcg, 1) + ", rank-4 MRR = " + fmt(mrr, 1));
}

Outcome pseudo_equals_labeled() {
  Gen gen(31337);
  const std::size_t dim = 64, n_queries = 150, n_distractors = 500;
  std::vector<double> offset = [&] {
    std::vector<double> o(dim);
    double norm = 0;
    for (auto& x : o) norm += (x = gen.normal()) * x;
    for (auto& x : o) x /= std::sqrt(norm);
    return o;
  }();
  std::vector<ItemRecord> items;
  std::vector<QueryRecord> queries;
  Qrels qrels;
  auto noisy = [&](const std::vector<float>& base, double scale, bool shift) {
    std::vector<float> v(dim);
    for (std::size_t d = 0; d < dim; ++d)
      v[d] = static_cast<float>(base[d] + scale * gen.normal() / 8.0 + (shift ? offset[d] : 0.0));
    return v;
  };
  for (std::size_t j = 0; j < n_queries; ++j) {
    auto z = gen.gaussian_vector(dim);
    double norm = 0;
    for (float x : z) norm += double(x) * x;
    for (auto& x : z) x = static_cast<float>(x / std::sqrt(norm));
    const std::string t = "t" + std::to_string(j), i = "i" + std::to_string(j);
    items.push_back({{t, Modality::kText, {}, {}}, noisy(z, 0.1, false)});
    items.push_back({{i, Modality::kImage, {}, {}}, noisy(z, 0.1, true)});
    queries.push_back({{"q" + std::to_string(j), {}, QueryType::kTextQ}, z});
    qrels.entries["q" + std::to_string(j)] = {t, i};
  }
  for (std::size_t j = 0; j < n_distractors; ++j) {
    items.push_back({{"td" + std::to_string(j), Modality::kText, {}, {}}, gen.gaussian_vector(dim)});
    auto v = gen.gaussian_vector(dim);
    items.push_back({{"id" + std::to_string(j), Modality::kImage, {}, {}}, noisy(v, 0.0, true)});
  }
  const auto store = EmbeddingStore::from_records(std::move(items));
  const auto qs = QuerySet::from_records(std::move(queries));

  Check c;
  const auto pseudo_pairs = build_pseudo_pairs(qs, store, 4);
  for (Modality m : kModalities) {
    for (const auto& p : pseudo_pairs[index_of(m)]) {
      const auto& gold = qrels.entries[p.query_id];
      c.expect(gold.contains(p.item_id), "argmax of " + p.query_id + " is not its gold positive");
    }
  }
  const auto labeled_pairs = build_labeled_pairs(qs, qrels, store);
  const auto pseudo = estimate_stats(pseudo_pairs, PairSource::kPseudo, store.fingerprint());
  const auto labeled = estimate_stats(labeled_pairs, PairSource::kLabeled, store.fingerprint());
  for (Modality m : kModalities) {
    const auto& a = pseudo.at(m);
    const auto& b = labeled.at(m);
    c.expect(std::memcmp(&a.mean, &b.mean, sizeof(double)) == 0 &&
                 std::memcmp(&a.std, &b.std, sizeof(double)) == 0 &&
                 std::memcmp(&a.variance, &b.variance, sizeof(double)) == 0 && a.count == b.count,
             std::string(to_string(m)) + " stats differ");
  }
  return c.outcome(std::to_string(n_queries) +
                   " queries whose per-modality argmax is the gold positive: pseudo and labeled "
                   "stats are bit-identical (text mean " + fmt(pseudo.at(Modality::kText).mean, 6) +
                   ", image mean " + fmt(pseudo.at(Modality::kImage).mean, 6) + ")");
}

Outcome skewness_and_svd() {
  Check c;
  const std::vector<double> three = {0, 0, 1};
  const double g = skewness(three);
  c.expect(std::fabs(g - 1.0 / std::sqrt(2.0)) <= kSkewTolerance, "skewness([0,0,1]) = " + fmt(g, 12));

  for (std::size_t d = 0; d < 1000; ++d) {
    Gen gen = Gen::for_case(555, d);
    std::vector<double> xs(gen.between(3, 500));
    for (auto& x : xs) {
      const double z = gen.normal();
      x = gen.coin(0.3) ? z * z : z;
    }
    const double a = gen.uniform(0.1, 10.0), b = gen.uniform(-5.0, 5.0);
    std::vector<double> ys(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = a * xs[i] + b;
    c.expect(std::fabs(skewness(ys) - skewness(xs)) <= kSkewTolerance,
             "affine draw " + std::to_string(d));
  }

  double worst = 0.0;
  auto compare = [&](std::span<const double> m, std::size_t rows, std::size_t cols,
                     const std::string& label) {
    std::vector<ProjectionLabel> labels(rows, ProjectionLabel{"x", ProjectionRole::kQuery});
    const auto got = svd_project(m, rows, cols, labels);
    const auto ref = oracle::svd_project(m, rows, cols);
    for (std::size_t j = 0; j < 2; ++j)
      worst = std::max(worst, std::fabs(got.singular_values[j] - ref.singular_values[j]));
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = 0; j < 2; ++j)
        worst = std::max(worst, std::fabs(got.coords[r][j] - ref.coords[r][j]));
    c.expect(worst <= kSvdTolerance, label);
  };
  for (std::size_t t = 0; t < 30; ++t) {
    Gen gen = Gen::for_case(556, t);
    const std::size_t rows = gen.between(3, 300), cols = gen.between(2, 64);
    std::vector<double> m(rows * cols);
    for (auto& x : m) x = gen.normal();
    compare(m, rows, cols, "random matrix " + std::to_string(t));
  }
  // Query/positive matrix of the synthetic corpus.
  SynthConfig cfg;
  cfg.n_text = cfg.n_image = 500;
  cfg.n_queries = 120;
  cfg.n_calib_queries = 2;
  const auto data = generate_synthetic(cfg);
  const auto proj = project_queries_and_positives(data.queries, data.qrels, data.store);
  std::vector<double> m;
  for (const auto& l : proj.labels) {
    const auto q = data.queries.find(l.id);
    const auto v = l.role == ProjectionRole::kQuery ? data.queries.vector(*q)
                                                    : data.store.vector(*data.store.find(l.id));
    for (float x : v) m.push_back(x);
  }
  compare(m, proj.labels.size(), cfg.dim, "synthetic query/positive matrix");
  char w[32];
  std::snprintf(w, sizeof w, "%.1e", worst);
  return c.outcome("skewness([0,0,1]) = " + fmt(g, 9) +
                   "; 1000 affine draws within 1e-9; svd_project vs LAPACK max deviation " + w +
                   " (<= 1e-7)");
}

Outcome determinism() {
  auto& runs = pipeline();
  if (runs.seconds_single < 0) return {false, runs.error};
  std::string error;
  if (run_pipeline(runs.root / "t8", 8, error) < 0) return {false, "threads=8: " + error};
  if (run_pipeline(runs.root / "t1b", 1, error) < 0) return {false, "repeat: " + error};

  Check c;
  std::size_t files = 0;
  const fs::path base = runs.root / "t1";
  for (const auto& entry : fs::recursive_directory_iterator(base)) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), base);
    const std::string bytes = testing::read_text(entry.path());
    for (const char* other : {"t8", "t1b"}) {
      const fs::path twin = runs.root / other / rel;
      c.expect(fs::exists(twin) && testing::read_text(twin) == bytes,
               rel.string() + " differs in " + other);
    }
    ++files;
  }
  for (const char* other : {"t8", "t1b"}) {
    std::size_t n = 0;
    for (const auto& e : fs::recursive_directory_iterator(runs.root / other)) n += e.is_regular_file();
    c.expect(n == files, std::string(other) + " has " + std::to_string(n) + " files");
  }
  return c.outcome(std::to_string(files) +
                   " artifacts byte-identical across two --threads 1 runs and a --threads 8 run");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"synthetic gap recovery", synthetic_gap_recovery},
      {"top-k oracle equivalence", top_k_oracle},
      {"stats closed-form exactness", stats_exactness},
      {"standardization monotonicity", standardization_monotonicity},
      {"merge correctness", merge_correctness},
      {"metric oracle", metric_oracle},
      {"pseudo = labeled coincidence", pseudo_equals_labeled},
      {"skewness and SVD oracles", skewness_and_svd},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << i + 1 << "] " << criteria[i].first << ": "
              << o.detail << " (" << fmt(dt, 1) << " s)" << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
