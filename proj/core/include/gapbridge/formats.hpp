#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gapbridge/analysis.hpp"
#include "gapbridge/calibration.hpp"
#include "gapbridge/evaluation.hpp"
#include "gapbridge/ranked_run.hpp"

namespace gapbridge {

inline constexpr std::string_view kStatsFormat = "mbstats-v1";
inline constexpr std::string_view kReportFormat = "mbreport-v1";

using ordered_json = nlohmann::ordered_json;

/// Pretty-printed JSON with a trailing newline.
void write_json(const ordered_json& doc, const std::filesystem::path& path);

// Pseudo / labeled pairs: JSONL {query_id, item_id, modality, score}, one
// line per pair ordered by query id, text before image.
void write_pairs(const PairSets& pairs, const std::filesystem::path& path);
PairSets read_pairs(const std::filesystem::path& path);

// stats.json
ordered_json stats_to_json(const StatsBundle& stats, const ordered_json& config = {});
void write_stats(const StatsBundle& stats, const std::filesystem::path& path,
                 const ordered_json& config = {});
/// Throws kMalformedInput, kMissingModalityStats or kDegenerateStats.
StatsBundle read_stats(const std::filesystem::path& path);

// Run files: JSONL {query_id, ranking: [...], method, k}.
void write_run(const RankedRun& run, const std::filesystem::path& path);
/// One RankedRun per method present in the file (cos first). Throws kBadRun.
std::vector<RankedRun> read_runs(const std::filesystem::path& path);

// Evaluation reports.
ordered_json report_to_json(const std::vector<MetricReport>& reports,
                            const ordered_json& config = {});
/// One block per cutoff: rows are methods, column groups TextQ / ImageQ /
/// (unknown) / overall, each with Recall, MRR, NDCG.
std::string format_report_table(const std::vector<MetricReport>& reports);

// Diagnostics.
ordered_json skewness_to_json(const SkewnessSummary& summary, const ordered_json& config = {});
std::string skewness_to_csv(const SkewnessSummary& summary);
ordered_json gaps_to_json(const std::vector<ScoreGapSample>& gaps, const Histogram& hist,
                          const ordered_json& config = {});
std::string gaps_to_csv(const std::vector<ScoreGapSample>& gaps);
ordered_json projection_to_json(const Projection2D& projection, const ordered_json& config = {});
std::string projection_to_csv(const Projection2D& projection);

}  // namespace gapbridge
