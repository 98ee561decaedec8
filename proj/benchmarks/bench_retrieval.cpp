#include <benchmark/benchmark.h>

#include <map>
#include <memory>

#include "gapbridge/calibration.hpp"
#include "gapbridge/similarity.hpp"
#include "gapbridge/synth.hpp"

namespace {

using namespace gapbridge;

// Corpora are cached per size so setup stays out of the timed region.
const SynthDataset& corpus(std::size_t n_per_modality) {
  static std::map<std::size_t, std::unique_ptr<SynthDataset>> cache;
  auto& slot = cache[n_per_modality];
  if (!slot) {
    SynthConfig cfg;
    cfg.n_text = cfg.n_image = n_per_modality;
    cfg.n_queries = 64;
    cfg.n_calib_queries = 200;
    slot = std::make_unique<SynthDataset>(generate_synthetic(cfg));
  }
  return *slot;
}

void BM_TopK(benchmark::State& state) {
  const auto& data = corpus(static_cast<std::size_t>(state.range(0)));
  const auto k = static_cast<std::size_t>(state.range(1));
  const auto view = data.store.view(Modality::kText);
  std::size_t q = 0;
  for (auto _ : state) {
    auto hits = top_k(data.queries.vector(q++ % data.queries.size()), view, k);
    benchmark::DoNotOptimize(hits.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(view.size()));
}
BENCHMARK(BM_TopK)->ArgsProduct({{1000, 10000, 50000}, {1, 20, 100}});

void BM_RetrieveStd(benchmark::State& state) {
  const auto& data = corpus(static_cast<std::size_t>(state.range(0)));
  const auto stats = estimate_stats(build_pseudo_pairs(data.calib_queries, data.store),
                                    PairSource::kPseudo, data.store.fingerprint());
  std::size_t q = 0;
  for (auto _ : state) {
    auto hits = retrieve(data.queries.vector(q++ % data.queries.size()), data.store, 100,
                         ScoreMethod::kStd, &stats);
    benchmark::DoNotOptimize(hits.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.store.size()));
}
BENCHMARK(BM_RetrieveStd)->Arg(1000)->Arg(10000)->Arg(50000);

void BM_RetrieveAllThreads(benchmark::State& state) {
  const auto& data = corpus(10000);
  const auto threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) {
    auto run = retrieve_all(data.queries, data.store, 100, ScoreMethod::kCos, nullptr, threads);
    benchmark::DoNotOptimize(run.per_query.size());
  }
}
BENCHMARK(BM_RetrieveAllThreads)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime();

}  // namespace
