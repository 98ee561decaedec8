#include "gapbridge/embedding_store.hpp"

#include <algorithm>

#include "gapbridge/error.hpp"
#include "io_util.hpp"
#include "sha256.hpp"

namespace gapbridge {

namespace fs = std::filesystem;
using nlohmann::json;

EmbeddingStore EmbeddingStore::from_records(std::vector<ItemRecord> records) {
  if (records.empty()) return assemble(0, {}, {});
  const std::size_t dim = records.front().vector.size();
  if (dim == 0) throw Error(ErrorCode::kDimMismatch, "embedding dimension must be >= 1");

  std::sort(records.begin(), records.end(),
            [](const ItemRecord& a, const ItemRecord& b) { return a.meta.id < b.meta.id; });

  std::vector<ItemMeta> meta;
  std::vector<float> vectors;
  meta.reserve(records.size());
  vectors.reserve(records.size() * dim);
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& rec = records[i];
    if (rec.meta.id.empty()) throw Error(ErrorCode::kCorruptManifest, "item id must be non-empty");
    if (!meta.empty() && meta.back().id == rec.meta.id) {
      throw Error(ErrorCode::kDuplicateId, "duplicate item id '" + rec.meta.id + "'");
    }
    if (rec.vector.size() != dim) {
      throw Error(ErrorCode::kDimMismatch, "item '" + rec.meta.id + "' has dimension " +
                                               std::to_string(rec.vector.size()) + ", expected " +
                                               std::to_string(dim));
    }
    detail::normalize_row(rec.vector, rec.meta.id);
    vectors.insert(vectors.end(), rec.vector.begin(), rec.vector.end());
    meta.push_back(std::move(rec.meta));
  }
  return assemble(dim, std::move(meta), std::move(vectors));
}

EmbeddingStore EmbeddingStore::assemble(std::size_t dim, std::vector<ItemMeta> meta,
                                        std::vector<float> vectors) {
  EmbeddingStore store;
  store.dim_ = dim;
  store.meta_ = std::move(meta);
  store.vectors_ = std::move(vectors);
  for (std::size_t row = 0; row < store.meta_.size(); ++row) {
    store.rows_by_modality_[index_of(store.meta_[row].modality)].push_back(
        static_cast<std::uint32_t>(row));
  }
  detail::Sha256 hash;
  for (const auto& m : store.meta_) {
    hash.update(detail::item_meta_line(m));
    hash.update("\n");
  }
  hash.update(detail::encode_f32le(store.vectors_));
  store.fingerprint_ = hash.hex_digest();
  return store;
}

ModalityView EmbeddingStore::view(Modality m) const {
  return ModalityView(*this, m, rows_by_modality_[index_of(m)]);
}

std::optional<std::size_t> EmbeddingStore::find(std::string_view id) const {
  auto it = std::lower_bound(meta_.begin(), meta_.end(), id,
                             [](const ItemMeta& m, std::string_view key) { return m.id < key; });
  if (it == meta_.end() || it->id != id) return std::nullopt;
  return static_cast<std::size_t>(it - meta_.begin());
}

EmbeddingStore ingest(std::vector<ItemMeta> meta, std::span<const float> raw, std::size_t dim,
                      const fs::path& out_dir) {
  if (dim == 0) throw Error(ErrorCode::kDimMismatch, "embedding dimension must be >= 1");
  if (raw.size() != meta.size() * dim) {
    throw Error(ErrorCode::kDimMismatch,
                "vector matrix holds " + std::to_string(raw.size()) + " values, expected " +
                    std::to_string(meta.size()) + " rows x " + std::to_string(dim));
  }
  std::vector<ItemRecord> records;
  records.reserve(meta.size());
  for (std::size_t i = 0; i < meta.size(); ++i) {
    auto row = raw.subspan(i * dim, dim);
    records.push_back({std::move(meta[i]), std::vector<float>(row.begin(), row.end())});
  }
  EmbeddingStore store = EmbeddingStore::from_records(std::move(records));
  write_store(store, out_dir);
  return store;
}

void write_store(const EmbeddingStore& store, const fs::path& dir) {
  std::vector<std::string> lines;
  lines.reserve(store.size());
  for (std::size_t row = 0; row < store.size(); ++row) {
    lines.push_back(detail::item_meta_line(store.meta(row)));
  }
  detail::write_block(dir, store.dim(), lines, store.matrix());
}

EmbeddingStore load_store(const fs::path& dir) {
  detail::RawBlock block = detail::read_block(dir);
  std::vector<ItemMeta> meta;
  meta.reserve(block.count);
  for (std::size_t row = 0; row < block.count; ++row) {
    const json& obj = block.meta[row];
    const json& id = detail::require(obj, "id", ErrorCode::kCorruptManifest);
    const json& modality = detail::require(obj, "modality", ErrorCode::kCorruptManifest);
    if (!id.is_string() || id.get<std::string>().empty() || !modality.is_string()) {
      throw Error(ErrorCode::kCorruptManifest, "bad metadata row " + std::to_string(row));
    }
    ItemMeta m;
    m.id = id.get<std::string>();
    try {
      m.modality = parse_modality(modality.get<std::string>());
    } catch (const Error& e) {
      throw Error(ErrorCode::kCorruptManifest, e.what());
    }
    m.text = detail::optional_string(obj, "text", ErrorCode::kCorruptManifest);
    m.uri = detail::optional_string(obj, "uri", ErrorCode::kCorruptManifest);
    if (!meta.empty()) {
      if (meta.back().id == m.id) throw Error(ErrorCode::kDuplicateId, "duplicate item id '" + m.id + "'");
      if (meta.back().id > m.id) {
        throw Error(ErrorCode::kCorruptManifest, "meta.jsonl is not in ascending id order at '" + m.id + "'");
      }
    }
    detail::check_unit_norm(
        std::span<const float>(block.vectors.data() + row * block.dim, block.dim), m.id);
    meta.push_back(std::move(m));
  }
  return EmbeddingStore::assemble(block.dim, std::move(meta), std::move(block.vectors));
}

// ---------------------------------------------------------------------------

std::vector<float> read_f32le(const fs::path& path) {
  const std::string bytes = detail::read_file(path);
  if (bytes.size() % sizeof(float) != 0) {
    throw Error(ErrorCode::kMalformedInput, path.string() + " is not a whole number of float32 values");
  }
  return detail::decode_f32le(bytes);
}

void write_f32le(std::span<const float> values, const fs::path& path) {
  detail::write_file(path, detail::encode_f32le(values));
}

std::vector<ItemMeta> read_item_meta(const fs::path& path) {
  std::vector<ItemMeta> out;
  for (const json& row : detail::read_jsonl(path, ErrorCode::kMalformedInput)) {
    const json& id = detail::require(row, "id", ErrorCode::kMalformedInput);
    const json& modality = detail::require(row, "modality", ErrorCode::kMalformedInput);
    if (!id.is_string() || !modality.is_string()) {
      throw Error(ErrorCode::kMalformedInput, "id and modality must be strings in " + path.string());
    }
    ItemMeta m;
    m.id = id.get<std::string>();
    try {
      m.modality = parse_modality(modality.get<std::string>());
    } catch (const Error& e) {
      throw Error(ErrorCode::kMalformedInput, e.what());
    }
    m.text = detail::optional_string(row, "text", ErrorCode::kMalformedInput);
    m.uri = detail::optional_string(row, "uri", ErrorCode::kMalformedInput);
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<QueryMeta> read_query_meta(const fs::path& path) {
  std::vector<QueryMeta> out;
  for (const json& row : detail::read_jsonl(path, ErrorCode::kMalformedInput)) {
    const json& id = detail::require(row, "id", ErrorCode::kMalformedInput);
    if (!id.is_string()) throw Error(ErrorCode::kMalformedInput, "id must be a string in " + path.string());
    QueryMeta m;
    m.id = id.get<std::string>();
    m.text = detail::optional_string(row, "text", ErrorCode::kMalformedInput);
    if (auto qtype = detail::optional_string(row, "qtype", ErrorCode::kMalformedInput)) {
      try {
        m.qtype = parse_query_type(*qtype);
      } catch (const Error& e) {
        throw Error(ErrorCode::kMalformedInput, e.what());
      }
    }
    out.push_back(std::move(m));
  }
  return out;
}

bool meta_declares_modality(const fs::path& path) {
  const auto rows = detail::read_jsonl(path, ErrorCode::kMalformedInput);
  return !rows.empty() && rows.front().contains("modality");
}

Qrels load_qrels(const fs::path& path) {
  Qrels qrels;
  for (const json& row : detail::read_jsonl(path, ErrorCode::kMalformedInput)) {
    const json& qid = detail::require(row, "query_id", ErrorCode::kMalformedInput);
    const json& ids = detail::require(row, "positive_ids", ErrorCode::kMalformedInput);
    if (!qid.is_string() || !ids.is_array()) {
      throw Error(ErrorCode::kMalformedInput, "malformed qrels row in " + path.string());
    }
    auto& positives = qrels.entries[qid.get<std::string>()];
    for (const json& id : ids) {
      if (!id.is_string()) throw Error(ErrorCode::kMalformedInput, "positive ids must be strings");
      positives.insert(id.get<std::string>());
    }
    if (positives.empty()) {
      throw Error(ErrorCode::kEmptyPositives,
                  "query '" + qid.get<std::string>() + "' has no positive ids");
    }
  }
  return qrels;
}

void write_qrels(const Qrels& qrels, const fs::path& path) {
  std::string out;
  for (const auto& [qid, positives] : qrels.entries) {
    nlohmann::ordered_json row;
    row["query_id"] = qid;
    row["positive_ids"] = std::vector<std::string>(positives.begin(), positives.end());
    out += row.dump();
    out += '\n';
  }
  detail::write_file(path, out);
}

void validate_qrels(const Qrels& qrels, const EmbeddingStore& store) {
  for (const auto& [qid, positives] : qrels.entries) {
    if (positives.empty()) throw Error(ErrorCode::kEmptyPositives, "query '" + qid + "' has no positives");
    for (const auto& id : positives) {
      if (!store.find(id)) {
        throw Error(ErrorCode::kUnknownItem, "qrels for '" + qid + "' reference unknown item '" + id + "'");
      }
    }
  }
}

}  // namespace gapbridge
