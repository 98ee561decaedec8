#include <benchmark/benchmark.h>

#include <random>

#include "gapbridge/calibration.hpp"

namespace {

using namespace gapbridge;

PairSets random_pairs(std::size_t n) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> text(0.84, 0.06), image(0.31, 0.02);
  PairSets pairs;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string q = "q" + std::to_string(i);
    pairs[0].push_back({q, "t" + std::to_string(i), Modality::kText, text(rng)});
    pairs[1].push_back({q, "i" + std::to_string(i), Modality::kImage, image(rng)});
  }
  return pairs;
}

void BM_EstimateStats(benchmark::State& state) {
  const auto pairs = random_pairs(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto stats = estimate_stats(pairs, PairSource::kPseudo, "bench");
    benchmark::DoNotOptimize(stats);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 2);
}
BENCHMARK(BM_EstimateStats)->RangeMultiplier(10)->Range(100, 1000000);

}  // namespace
