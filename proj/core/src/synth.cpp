#include "gapbridge/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "gapbridge/error.hpp"

namespace gapbridge {

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
    : key_(mix(seed ^ mix(stream))) {}

std::uint64_t CounterRng::mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t CounterRng::next_u64() noexcept {
  return mix(key_ + (counter_++) * 0x9E3779B97F4A7C15ULL);
}

double CounterRng::next_uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::next_normal() noexcept {
  const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
  const double u2 = next_uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t CounterRng::next_below(std::uint64_t n) noexcept {
  __extension__ using Wide = unsigned __int128;
  return static_cast<std::uint64_t>((static_cast<Wide>(next_u64()) * n) >> 64);
}

void SynthConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kBadConfig, what); };
  if (dim == 0) fail("dim must be positive");
  if (n_text == 0 || n_image == 0) fail("n_text and n_image must be positive");
  if (n_queries == 0) fail("n_queries must be positive");
  if (n_calib_queries == 0) fail("n_calib_queries must be positive");
  if (!(imageq_fraction >= 0.0 && imageq_fraction <= 1.0)) fail("imageq_fraction must be in [0, 1]");
  if (!std::isfinite(gap_offset) || gap_offset < 0.0) fail("gap_offset must be finite and >= 0");
  if (!std::isfinite(noise) || noise <= 0.0) fail("noise must be finite and > 0");
}

namespace {

enum Stream : std::uint64_t {
  kOffsetStream = 1,
  kTextItemStream = 2,
  kImageItemStream = 3,
  kEvalQueryStream = 4,
  kCalibQueryStream = 5,
};

std::uint64_t stream_id(Stream tag, std::size_t index) {
  return (static_cast<std::uint64_t>(tag) << 40) ^ static_cast<std::uint64_t>(index);
}

std::string make_id(char prefix, std::size_t index, std::size_t total) {
  const std::size_t width = std::max<std::size_t>(6, std::to_string(total).size());
  std::string digits = std::to_string(index);
  return std::string(1, prefix) + std::string(width - digits.size(), '0') + digits;
}

/// Gaussian vector with per-coordinate variance scale^2 / dim, so its
/// expected squared norm is scale^2.
void add_gaussian(CounterRng& rng, std::vector<double>& acc, double scale) {
  const double sd = scale / std::sqrt(static_cast<double>(acc.size()));
  for (double& x : acc) x += sd * rng.next_normal();
}

struct Items {
  std::vector<std::vector<double>> latents;
  std::vector<ItemRecord> records;
};

Items make_items(const SynthConfig& c, Modality m, std::size_t count,
                 const std::vector<double>& offset) {
  Items items;
  items.latents.reserve(count);
  items.records.reserve(count);
  const Stream tag = m == Modality::kText ? kTextItemStream : kImageItemStream;
  const char prefix = m == Modality::kText ? 't' : 'i';
  for (std::size_t i = 0; i < count; ++i) {
    CounterRng rng(c.seed, stream_id(tag, i));
    std::vector<double> latent(c.dim, 0.0);
    add_gaussian(rng, latent, 1.0);
    std::vector<double> v = latent;
    add_gaussian(rng, v, c.noise);
    if (m == Modality::kText) {
      for (std::size_t d = 0; d < c.dim; ++d) v[d] += offset[d];
    }
    ItemRecord rec;
    rec.meta.id = make_id(prefix, i, count);
    rec.meta.modality = m;
    rec.vector.assign(v.begin(), v.end());
    items.latents.push_back(std::move(latent));
    items.records.push_back(std::move(rec));
  }
  return items;
}

struct QuerySplit {
  QuerySet set;
  Qrels qrels;
};

QuerySplit make_queries(const SynthConfig& c, Stream tag, char prefix, std::size_t count,
                        const Items& text, const Items& image, const std::vector<double>& offset) {
  const auto n_image_q = static_cast<std::size_t>(
      std::llround(static_cast<double>(count) * c.imageq_fraction));
  std::vector<QueryRecord> records;
  records.reserve(count);
  QuerySplit split;
  for (std::size_t i = 0; i < count; ++i) {
    CounterRng rng(c.seed, stream_id(tag, i));
    const bool image_q = i < n_image_q;
    const Items& pool = image_q ? image : text;
    const std::size_t gold = static_cast<std::size_t>(rng.next_below(pool.records.size()));
    std::vector<double> v = pool.latents[gold];
    add_gaussian(rng, v, c.noise);
    for (std::size_t d = 0; d < c.dim; ++d) v[d] += offset[d];

    QueryRecord rec;
    rec.meta.id = make_id(prefix, i, count);
    rec.meta.qtype = image_q ? QueryType::kImageQ : QueryType::kTextQ;
    rec.vector.assign(v.begin(), v.end());
    split.qrels.entries[rec.meta.id] = {pool.records[gold].meta.id};
    records.push_back(std::move(rec));
  }
  split.set = QuerySet::from_records(std::move(records));
  return split;
}

}  // namespace

SynthDataset generate_synthetic(const SynthConfig& config) {
  config.validate();

  std::vector<double> offset(config.dim, 0.0);
  if (config.gap_offset > 0.0) {
    CounterRng rng(config.seed, stream_id(kOffsetStream, 0));
    add_gaussian(rng, offset, 1.0);
    double norm = 0.0;
    for (double x : offset) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : offset) x *= config.gap_offset / norm;
  }

  Items text = make_items(config, Modality::kText, config.n_text, offset);
  Items image = make_items(config, Modality::kImage, config.n_image, offset);

  SynthDataset data;
  auto eval = make_queries(config, kEvalQueryStream, 'q', config.n_queries, text, image, offset);
  auto calib =
      make_queries(config, kCalibQueryStream, 'c', config.n_calib_queries, text, image, offset);
  data.queries = std::move(eval.set);
  data.qrels = std::move(eval.qrels);
  data.calib_queries = std::move(calib.set);
  data.calib_qrels = std::move(calib.qrels);

  std::vector<ItemRecord> records = std::move(text.records);
  for (auto& r : image.records) records.push_back(std::move(r));
  data.store = EmbeddingStore::from_records(std::move(records));
  return data;
}

}  // namespace gapbridge
