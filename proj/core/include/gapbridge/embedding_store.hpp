#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gapbridge/modality.hpp"

namespace gapbridge {

inline constexpr std::string_view kStoreFormat = "mbstore-v1";
/// Accepted deviation of a loaded vector's L2 norm from 1.
inline constexpr double kNormTolerance = 1e-4;
/// Vectors with a norm below this cannot be normalised.
inline constexpr double kZeroNormThreshold = 1e-12;

struct ItemMeta {
  std::string id;
  Modality modality = Modality::kText;
  std::optional<std::string> text;
  std::optional<std::string> uri;
};

struct ItemRecord {
  ItemMeta meta;
  std::vector<float> vector;
};

class ModalityView;

/// Immutable multi-modal embedding database. Rows are ordered by ascending
/// id; every vector is unit length and has dimension `dim()`.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;

  /// Validates and normalises `records`, then sorts them by id.
  /// Throws kDuplicateId, kDimMismatch, kZeroVector or kNonFiniteValue.
  static EmbeddingStore from_records(std::vector<ItemRecord> records);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return meta_.size(); }
  bool empty() const noexcept { return meta_.empty(); }

  const ItemMeta& meta(std::size_t row) const { return meta_[row]; }
  const std::string& id(std::size_t row) const { return meta_[row].id; }
  Modality modality(std::size_t row) const { return meta_[row].modality; }
  std::span<const float> vector(std::size_t row) const {
    return {vectors_.data() + row * dim_, dim_};
  }
  /// Row-major `size() x dim()` block.
  std::span<const float> matrix() const noexcept { return vectors_; }

  ModalityView view(Modality m) const;
  std::optional<std::size_t> find(std::string_view id) const;

  /// SHA-256 over the canonical metadata lines and the vector block.
  const std::string& fingerprint() const noexcept { return fingerprint_; }

 private:
  friend EmbeddingStore load_store(const std::filesystem::path& dir);

  static EmbeddingStore assemble(std::size_t dim, std::vector<ItemMeta> meta,
                                 std::vector<float> vectors);

  std::size_t dim_ = 0;
  std::vector<ItemMeta> meta_;
  std::vector<float> vectors_;
  std::array<std::vector<std::uint32_t>, 2> rows_by_modality_;
  std::string fingerprint_;
};

/// Items of one modality in ascending-id order. Cheap to copy; borrows the
/// store, which must outlive it.
class ModalityView {
 public:
  ModalityView(const EmbeddingStore& store, Modality m,
                std::span<const std::uint32_t> rows) noexcept
      : store_(&store), modality_(m), rows_(rows) {}

  Modality modality() const noexcept { return modality_; }
  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }
  std::size_t dim() const noexcept { return store_->dim(); }

  std::uint32_t row(std::size_t i) const { return rows_[i]; }
  const std::string& id(std::size_t i) const { return store_->id(rows_[i]); }
  std::span<const float> vector(std::size_t i) const { return store_->vector(rows_[i]); }

  std::span<const std::uint32_t> rows() const noexcept { return rows_; }
  const EmbeddingStore& store() const noexcept { return *store_; }

 private:
  const EmbeddingStore* store_;
  Modality modality_;
  std::span<const std::uint32_t> rows_;
};

inline ModalityView modality_view(const EmbeddingStore& store, Modality m) {
  return store.view(m);
}

/// Builds a store from metadata plus a row-major `meta.size() x dim` matrix
/// and writes it to `out_dir`.
EmbeddingStore ingest(std::vector<ItemMeta> meta, std::span<const float> raw,
                      std::size_t dim, const std::filesystem::path& out_dir);

void write_store(const EmbeddingStore& store, const std::filesystem::path& dir);
EmbeddingStore load_store(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Queries

struct QueryMeta {
  std::string id;
  std::optional<std::string> text;
  std::optional<QueryType> qtype;
};

struct QueryRecord {
  QueryMeta meta;
  std::vector<float> vector;
};

/// Query embeddings, same storage rules as EmbeddingStore minus modality.
class QuerySet {
 public:
  QuerySet() = default;

  static QuerySet from_records(std::vector<QueryRecord> records);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return meta_.size(); }
  bool empty() const noexcept { return meta_.empty(); }

  const QueryMeta& meta(std::size_t i) const { return meta_[i]; }
  const std::string& id(std::size_t i) const { return meta_[i].id; }
  std::optional<QueryType> qtype(std::size_t i) const { return meta_[i].qtype; }
  std::span<const float> vector(std::size_t i) const {
    return {vectors_.data() + i * dim_, dim_};
  }
  std::optional<std::size_t> find(std::string_view id) const;

  /// Query-id -> question type for every query that declares one.
  std::map<std::string, QueryType> qtypes() const;

 private:
  friend QuerySet load_queries(const std::filesystem::path& dir);

  std::size_t dim_ = 0;
  std::vector<QueryMeta> meta_;
  std::vector<float> vectors_;
};

QuerySet ingest_queries(std::vector<QueryMeta> meta, std::span<const float> raw,
                        std::size_t dim, const std::filesystem::path& out_dir);
void write_queries(const QuerySet& queries, const std::filesystem::path& dir);
QuerySet load_queries(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Raw ingest inputs

/// Headerless row-major little-endian float32 matrix.
std::vector<float> read_f32le(const std::filesystem::path& path);
void write_f32le(std::span<const float> values, const std::filesystem::path& path);

/// Ingest metadata JSONL: {id, modality, text?, uri?} per row.
std::vector<ItemMeta> read_item_meta(const std::filesystem::path& path);
/// Query metadata JSONL: {id, text?, qtype?} per row.
std::vector<QueryMeta> read_query_meta(const std::filesystem::path& path);
/// True when the first metadata row declares a modality (an item file).
bool meta_declares_modality(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Relevance judgements

/// query id -> non-empty set of positive item ids.
struct Qrels {
  std::map<std::string, std::set<std::string>> entries;

  const std::set<std::string>* find(const std::string& query_id) const {
    auto it = entries.find(query_id);
    return it == entries.end() ? nullptr : &it->second;
  }
};

Qrels load_qrels(const std::filesystem::path& path);
void write_qrels(const Qrels& qrels, const std::filesystem::path& path);
/// Throws kUnknownItem if any positive id is absent from `store`.
void validate_qrels(const Qrels& qrels, const EmbeddingStore& store);

}  // namespace gapbridge
