#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gapbridge/calibration.hpp"
#include "gapbridge/embedding_store.hpp"

namespace gapbridge {

/// Population moment coefficient g1 = m3 / m2^(3/2).
/// Throws kTooFewSamples (< 3 values) or kConstantInput.
double skewness(std::span<const double> scores);

struct QuerySkewness {
  std::string query_id;
  double text = 0.0;
  double image = 0.0;
};

struct SkewnessSummary {
  std::vector<QuerySkewness> per_query;
  double mean_text = 0.0;
  double mean_image = 0.0;
};

/// Skewness of each query's cosine scores against every text and every
/// image item, plus per-modality means across queries.
SkewnessSummary skewness_by_query(const QuerySet& queries, const EmbeddingStore& store,
                                  std::optional<QueryType> only = std::nullopt,
                                  unsigned threads = 1);

struct ScoreGapSample {
  std::string query_id;
  double gap = 0.0;
};

/// Mean standardized image score minus mean standardized text score over
/// the full candidate set of each modality.
double mean_score_gap(std::span<const float> query, const EmbeddingStore& store,
                      const StatsBundle& stats);

std::vector<ScoreGapSample> score_gaps(const QuerySet& queries, const EmbeddingStore& store,
                                       const StatsBundle& stats,
                                       std::optional<QueryType> only = std::nullopt,
                                       unsigned threads = 1);

/// Equal-width bins over [lo, hi): each bin is half-open except the last,
/// which also takes `hi`. Out-of-range values go to underflow / overflow.
struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> edges;  // bins + 1 entries
  std::vector<std::uint64_t> counts;
  std::uint64_t underflow = 0;
  std::uint64_t overflow = 0;

  std::uint64_t total() const noexcept;
};

inline constexpr std::size_t kGapHistogramBins = 60;
inline constexpr double kGapHistogramLo = -6.0;
inline constexpr double kGapHistogramHi = 6.0;

/// Throws kBadRange when bins == 0, lo >= hi, or a value is NaN.
Histogram histogram(std::span<const double> values, std::size_t bins, double lo, double hi);

enum class ProjectionRole { kQuery, kPositiveText, kPositiveImage };
std::string_view to_string(ProjectionRole r) noexcept;

struct ProjectionLabel {
  std::string id;
  ProjectionRole role = ProjectionRole::kQuery;
};

struct Projection2D {
  std::vector<ProjectionLabel> labels;
  std::vector<std::array<double, 2>> coords;
  std::array<double, 2> singular_values{};
};

/// Mean-centres the rows of a row-major `rows x cols` matrix and projects
/// them onto the top two right singular vectors. Each singular vector is
/// oriented so its largest-magnitude component (first on ties) is positive.
/// Throws kDegenerateInput for rows < 2, cols < 2 or a label count mismatch.
Projection2D svd_project(std::span<const double> matrix, std::size_t rows, std::size_t cols,
                         std::vector<ProjectionLabel> labels);

/// Stacks each selected query followed by its qrels positives and projects
/// them with svd_project.
Projection2D project_queries_and_positives(const QuerySet& queries, const Qrels& qrels,
                                           const EmbeddingStore& store,
                                           std::optional<QueryType> only = std::nullopt);

}  // namespace gapbridge
