#include "gapbridge/similarity.hpp"

#include <algorithm>
#include <numeric>

#include "gapbridge/error.hpp"

namespace gapbridge {

double cosine(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::kDimMismatch, "cosine of vectors with dimensions " +
                                             std::to_string(u.size()) + " and " +
                                             std::to_string(v.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    acc += static_cast<double>(u[i]) * static_cast<double>(v[i]);
  }
  return acc;
}

std::vector<double> all_scores(std::span<const float> query, const ModalityView& view) {
  if (view.empty()) {
    throw Error(ErrorCode::kEmptyModality,
                std::string("no items of modality '") + std::string(to_string(view.modality())) + "'");
  }
  if (query.size() != view.dim()) {
    throw Error(ErrorCode::kDimMismatch, "query dimension " + std::to_string(query.size()) +
                                             " does not match store dimension " +
                                             std::to_string(view.dim()));
  }
  std::vector<double> scores(view.size());
  for (std::size_t i = 0; i < view.size(); ++i) scores[i] = cosine(query, view.vector(i));
  return scores;
}

std::vector<std::uint32_t> select_top_k(std::span<const double> scores, std::size_t k) {
  const std::size_t n = scores.size();
  k = std::min(k, n);
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  auto before = [&](std::uint32_t a, std::uint32_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  };
  if (k == n) {
    std::sort(order.begin(), order.end(), before);
  } else {
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      before);
    order.resize(k);
  }
  return order;
}

std::vector<ScoredCandidate> top_k(std::span<const float> query, const ModalityView& view,
                                   std::size_t k) {
  if (k == 0) return {};
  const std::vector<double> scores = all_scores(query, view);
  std::vector<ScoredCandidate> out;
  for (std::uint32_t pos : select_top_k(scores, k)) {
    out.push_back({view.id(pos), view.modality(), scores[pos], std::nullopt});
  }
  return out;
}

}  // namespace gapbridge
