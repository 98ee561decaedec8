#pragma once

#include <cstddef>
#include <cstdint>

#include "gapbridge/embedding_store.hpp"

namespace gapbridge {

/// Counter-based generator: draw i of stream s under seed is
///   mix(mix(seed ^ mix(s)) + i * 0x9E3779B97F4A7C15)
/// where mix is the SplitMix64 finaliser. Any draw can be recomputed from
/// (seed, stream, i) alone, so output does not depend on generation order.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept;

  static std::uint64_t mix(std::uint64_t z) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double next_uniform() noexcept;
  /// Standard normal via Box-Muller (cosine branch); consumes two draws.
  double next_normal() noexcept;
  /// Uniform integer in [0, n) by 128-bit multiply-shift; n > 0.
  std::uint64_t next_below(std::uint64_t n) noexcept;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Two-cluster synthetic corpus with a controllable modality gap. Every
/// item gets a latent direction z plus noise; text items and all (textual)
/// queries additionally carry a shared offset of norm `gap_offset`.
struct SynthConfig {
  std::uint64_t seed = 42;
  std::size_t dim = 64;
  std::size_t n_text = 2000;
  std::size_t n_image = 2000;
  std::size_t n_queries = 400;
  std::size_t n_calib_queries = 400;
  /// Share of queries (both splits) whose gold item is an image.
  double imageq_fraction = 0.5;
  double gap_offset = 1.2;
  double noise = 0.6;

  /// Throws kBadConfig.
  void validate() const;
};

struct SynthDataset {
  EmbeddingStore store;
  QuerySet queries;
  Qrels qrels;
  QuerySet calib_queries;
  Qrels calib_qrels;
};

SynthDataset generate_synthetic(const SynthConfig& config);

}  // namespace gapbridge
