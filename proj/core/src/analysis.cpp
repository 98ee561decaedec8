#include "gapbridge/analysis.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "gapbridge/error.hpp"
#include "gapbridge/numeric.hpp"
#include "gapbridge/parallel.hpp"
#include "gapbridge/similarity.hpp"

namespace gapbridge {

double skewness(std::span<const double> scores) {
  if (scores.size() < 3) {
    throw Error(ErrorCode::kTooFewSamples,
                "skewness needs at least 3 samples, got " + std::to_string(scores.size()));
  }
  if (std::all_of(scores.begin(), scores.end(), [&](double x) { return x == scores.front(); })) {
    throw Error(ErrorCode::kConstantInput, "skewness of a constant sequence is undefined");
  }
  const double n = static_cast<double>(scores.size());
  const double mean = compensated_sum(scores) / n;
  CompensatedSum s2, s3;
  for (double x : scores) {
    const double d = x - mean;
    s2.add(d * d);
    s3.add(d * d * d);
  }
  const double m2 = s2.value() / n;
  const double m3 = s3.value() / n;
  if (!(m2 > 0.0)) throw Error(ErrorCode::kConstantInput, "zero variance");
  return m3 / std::pow(m2, 1.5);
}

namespace {

std::vector<std::size_t> select_queries(const QuerySet& queries, std::optional<QueryType> only) {
  std::vector<std::size_t> picked;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (!only || queries.qtype(i) == only) picked.push_back(i);
  }
  return picked;
}

}  // namespace

SkewnessSummary skewness_by_query(const QuerySet& queries, const EmbeddingStore& store,
                                  std::optional<QueryType> only, unsigned threads) {
  const auto picked = select_queries(queries, only);
  SkewnessSummary summary;
  summary.per_query.resize(picked.size());
  parallel_for(picked.size(), threads, [&](std::size_t i) {
    const std::size_t qi = picked[i];
    auto& row = summary.per_query[i];
    row.query_id = queries.id(qi);
    row.text = skewness(all_scores(queries.vector(qi), store.view(Modality::kText)));
    row.image = skewness(all_scores(queries.vector(qi), store.view(Modality::kImage)));
  });
  CompensatedSum text, image;
  for (const auto& row : summary.per_query) {
    text.add(row.text);
    image.add(row.image);
  }
  if (!summary.per_query.empty()) {
    const double n = static_cast<double>(summary.per_query.size());
    summary.mean_text = text.value() / n;
    summary.mean_image = image.value() / n;
  }
  return summary;
}

double mean_score_gap(std::span<const float> query, const EmbeddingStore& store,
                      const StatsBundle& stats) {
  std::array<double, 2> means{};
  for (Modality m : kModalities) {
    std::vector<double> scores = all_scores(query, store.view(m));
    for (double& x : scores) x = standardize(x, stats, m);
    means[index_of(m)] = compensated_mean(scores);
  }
  return means[index_of(Modality::kImage)] - means[index_of(Modality::kText)];
}

std::vector<ScoreGapSample> score_gaps(const QuerySet& queries, const EmbeddingStore& store,
                                       const StatsBundle& stats, std::optional<QueryType> only,
                                       unsigned threads) {
  const auto picked = select_queries(queries, only);
  std::vector<ScoreGapSample> out(picked.size());
  parallel_for(picked.size(), threads, [&](std::size_t i) {
    const std::size_t qi = picked[i];
    out[i] = {queries.id(qi), mean_score_gap(queries.vector(qi), store, stats)};
  });
  return out;
}

std::uint64_t Histogram::total() const noexcept {
  std::uint64_t n = underflow + overflow;
  for (auto c : counts) n += c;
  return n;
}

Histogram histogram(std::span<const double> values, std::size_t bins, double lo, double hi) {
  if (bins == 0 || !std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
    throw Error(ErrorCode::kBadRange, "histogram needs bins >= 1 and finite lo < hi");
  }
  Histogram h;
  h.lo = lo;
  h.hi = hi;
  h.counts.assign(bins, 0);
  h.edges.resize(bins + 1);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = lo + width * static_cast<double>(i);
  h.edges[bins] = hi;

  for (double v : values) {
    if (std::isnan(v)) throw Error(ErrorCode::kBadRange, "histogram input contains NaN");
    if (v < lo) {
      ++h.underflow;
      continue;
    }
    if (v > hi) {
      ++h.overflow;
      continue;
    }
    auto idx = static_cast<std::size_t>(std::min<double>(std::floor((v - lo) / width),
                                                         static_cast<double>(bins - 1)));
    // Division can land one bin off near an edge; settle against the stored edges.
    while (idx > 0 && v < h.edges[idx]) --idx;
    while (idx + 1 < bins && v >= h.edges[idx + 1]) ++idx;
    ++h.counts[idx];
  }
  return h;
}

std::string_view to_string(ProjectionRole r) noexcept {
  switch (r) {
    case ProjectionRole::kQuery: return "query";
    case ProjectionRole::kPositiveText: return "positive_text";
    case ProjectionRole::kPositiveImage: return "positive_image";
  }
  return "query";
}

Projection2D svd_project(std::span<const double> matrix, std::size_t rows, std::size_t cols,
                         std::vector<ProjectionLabel> labels) {
  if (rows < 2 || cols < 2) {
    throw Error(ErrorCode::kDegenerateInput, "projection needs at least 2 rows and 2 columns");
  }
  if (matrix.size() != rows * cols || labels.size() != rows) {
    throw Error(ErrorCode::kDegenerateInput, "matrix or label count does not match rows x cols");
  }
  if (!std::all_of(matrix.begin(), matrix.end(), [](double x) { return std::isfinite(x); })) {
    throw Error(ErrorCode::kDegenerateInput, "projection input contains non-finite values");
  }

  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::MatrixXd x = Eigen::Map<const RowMajor>(matrix.data(), static_cast<Eigen::Index>(rows),
                                                 static_cast<Eigen::Index>(cols));
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;

  Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::MatrixXd u = svd.matrixU().leftCols(2);
  const Eigen::MatrixXd& v = svd.matrixV();
  const auto& sigma = svd.singularValues();

  Projection2D out;
  out.labels = std::move(labels);
  out.coords.resize(rows);
  for (Eigen::Index j = 0; j < 2; ++j) {
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < v.rows(); ++i) {
      if (std::fabs(v(i, j)) > std::fabs(v(arg, j))) arg = i;
    }
    if (v(arg, j) < 0.0) u.col(j) *= -1.0;
    out.singular_values[static_cast<std::size_t>(j)] = sigma(j);
  }
  for (std::size_t r = 0; r < rows; ++r) {
    const auto ri = static_cast<Eigen::Index>(r);
    out.coords[r] = {u(ri, 0) * sigma(0), u(ri, 1) * sigma(1)};
  }
  return out;
}

Projection2D project_queries_and_positives(const QuerySet& queries, const Qrels& qrels,
                                           const EmbeddingStore& store,
                                           std::optional<QueryType> only) {
  if (queries.dim() != store.dim()) {
    throw Error(ErrorCode::kDimMismatch, "query and store dimensions differ");
  }
  std::vector<double> matrix;
  std::vector<ProjectionLabel> labels;
  auto append = [&](std::span<const float> v) {
    for (float x : v) matrix.push_back(static_cast<double>(x));
  };
  for (std::size_t qi : select_queries(queries, only)) {
    const auto* positives = qrels.find(queries.id(qi));
    if (positives == nullptr) continue;
    labels.push_back({queries.id(qi), ProjectionRole::kQuery});
    append(queries.vector(qi));
    for (const auto& item_id : *positives) {
      auto row = store.find(item_id);
      if (!row) throw Error(ErrorCode::kUnknownItem, "unknown positive item '" + item_id + "'");
      labels.push_back({item_id, store.modality(*row) == Modality::kText
                                     ? ProjectionRole::kPositiveText
                                     : ProjectionRole::kPositiveImage});
      append(store.vector(*row));
    }
  }
  const std::size_t rows = labels.size();
  return svd_project(matrix, rows, store.dim(), std::move(labels));
}

}  // namespace gapbridge
