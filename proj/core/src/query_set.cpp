#include <algorithm>

#include "gapbridge/embedding_store.hpp"
#include "gapbridge/error.hpp"
#include "io_util.hpp"

namespace gapbridge {

namespace fs = std::filesystem;
using nlohmann::json;

QuerySet QuerySet::from_records(std::vector<QueryRecord> records) {
  QuerySet set;
  if (records.empty()) return set;
  const std::size_t dim = records.front().vector.size();
  if (dim == 0) throw Error(ErrorCode::kDimMismatch, "query dimension must be >= 1");

  std::sort(records.begin(), records.end(),
            [](const QueryRecord& a, const QueryRecord& b) { return a.meta.id < b.meta.id; });
  set.dim_ = dim;
  set.meta_.reserve(records.size());
  set.vectors_.reserve(records.size() * dim);
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& rec = records[i];
    if (rec.meta.id.empty()) throw Error(ErrorCode::kCorruptManifest, "query id must be non-empty");
    if (!set.meta_.empty() && set.meta_.back().id == rec.meta.id) {
      throw Error(ErrorCode::kDuplicateId, "duplicate query id '" + rec.meta.id + "'");
    }
    if (rec.vector.size() != dim) {
      throw Error(ErrorCode::kDimMismatch, "query '" + rec.meta.id + "' has dimension " +
                                               std::to_string(rec.vector.size()) + ", expected " +
                                               std::to_string(dim));
    }
    detail::normalize_row(rec.vector, rec.meta.id);
    set.vectors_.insert(set.vectors_.end(), rec.vector.begin(), rec.vector.end());
    set.meta_.push_back(std::move(rec.meta));
  }
  return set;
}

std::optional<std::size_t> QuerySet::find(std::string_view id) const {
  auto it = std::lower_bound(meta_.begin(), meta_.end(), id,
                             [](const QueryMeta& m, std::string_view key) { return m.id < key; });
  if (it == meta_.end() || it->id != id) return std::nullopt;
  return static_cast<std::size_t>(it - meta_.begin());
}

std::map<std::string, QueryType> QuerySet::qtypes() const {
  std::map<std::string, QueryType> out;
  for (const auto& m : meta_) {
    if (m.qtype) out.emplace(m.id, *m.qtype);
  }
  return out;
}

QuerySet ingest_queries(std::vector<QueryMeta> meta, std::span<const float> raw, std::size_t dim,
                        const fs::path& out_dir) {
  if (dim == 0) throw Error(ErrorCode::kDimMismatch, "query dimension must be >= 1");
  if (raw.size() != meta.size() * dim) {
    throw Error(ErrorCode::kDimMismatch,
                "query matrix holds " + std::to_string(raw.size()) + " values, expected " +
                    std::to_string(meta.size()) + " rows x " + std::to_string(dim));
  }
  std::vector<QueryRecord> records;
  records.reserve(meta.size());
  for (std::size_t i = 0; i < meta.size(); ++i) {
    auto row = raw.subspan(i * dim, dim);
    records.push_back({std::move(meta[i]), std::vector<float>(row.begin(), row.end())});
  }
  QuerySet set = QuerySet::from_records(std::move(records));
  write_queries(set, out_dir);
  return set;
}

void write_queries(const QuerySet& queries, const fs::path& dir) {
  std::vector<std::string> lines;
  std::vector<float> vectors;
  lines.reserve(queries.size());
  vectors.reserve(queries.size() * queries.dim());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    lines.push_back(detail::query_meta_line(queries.meta(i)));
    auto v = queries.vector(i);
    vectors.insert(vectors.end(), v.begin(), v.end());
  }
  detail::write_block(dir, queries.dim(), lines, vectors);
}

QuerySet load_queries(const fs::path& dir) {
  detail::RawBlock block = detail::read_block(dir);
  QuerySet set;
  set.dim_ = block.dim;
  set.meta_.reserve(block.count);
  for (std::size_t row = 0; row < block.count; ++row) {
    const json& obj = block.meta[row];
    const json& id = detail::require(obj, "id", ErrorCode::kCorruptManifest);
    if (!id.is_string() || id.get<std::string>().empty()) {
      throw Error(ErrorCode::kCorruptManifest, "bad query metadata row " + std::to_string(row));
    }
    QueryMeta m;
    m.id = id.get<std::string>();
    m.text = detail::optional_string(obj, "text", ErrorCode::kCorruptManifest);
    if (auto qtype = detail::optional_string(obj, "qtype", ErrorCode::kCorruptManifest)) {
      try {
        m.qtype = parse_query_type(*qtype);
      } catch (const Error& e) {
        throw Error(ErrorCode::kCorruptManifest, e.what());
      }
    }
    if (!set.meta_.empty()) {
      if (set.meta_.back().id == m.id) throw Error(ErrorCode::kDuplicateId, "duplicate query id '" + m.id + "'");
      if (set.meta_.back().id > m.id) {
        throw Error(ErrorCode::kCorruptManifest, "query meta is not in ascending id order at '" + m.id + "'");
      }
    }
    detail::check_unit_norm(
        std::span<const float>(block.vectors.data() + row * block.dim, block.dim), m.id);
    set.meta_.push_back(std::move(m));
  }
  set.vectors_ = std::move(block.vectors);
  return set;
}

}  // namespace gapbridge
