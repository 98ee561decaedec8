#include "io_util.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "gapbridge/error.hpp"
#include "sha256.hpp"

namespace gapbridge::detail {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::kIo, "read failed: " + path.string());
  return std::move(ss).str();
}

void write_file(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot create " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

std::vector<json> read_jsonl(const fs::path& path, ErrorCode on_error) {
  const std::string text = read_file(path);
  std::vector<json> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    json row = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (row.is_discarded() || !row.is_object()) {
      throw Error(on_error, path.string() + ":" + std::to_string(line_no) + ": not a JSON object");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string encode_f32le(std::span<const float> values) {
  std::string bytes(values.size() * sizeof(float), '\0');
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(bytes.data(), values.data(), bytes.size());
  } else {
    for (std::size_t i = 0; i < values.size(); ++i) {
      const auto bits = std::bit_cast<std::uint32_t>(values[i]);
      for (int b = 0; b < 4; ++b) bytes[i * 4 + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
    }
  }
  return bytes;
}

std::vector<float> decode_f32le(std::string_view bytes) {
  std::vector<float> values(bytes.size() / sizeof(float));
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(values.data(), bytes.data(), values.size() * sizeof(float));
  } else {
    for (std::size_t i = 0; i < values.size(); ++i) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) {
        bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i * 4 + b])) << (8 * b);
      }
      values[i] = std::bit_cast<float>(bits);
    }
  }
  return values;
}

void normalize_row(std::span<float> row, std::string_view id) {
  double sq = 0.0;
  for (float x : row) {
    if (!std::isfinite(x)) {
      throw Error(ErrorCode::kNonFiniteValue, "non-finite component in '" + std::string(id) + "'");
    }
    sq += static_cast<double>(x) * static_cast<double>(x);
  }
  const double norm = std::sqrt(sq);
  if (norm < kZeroNormThreshold) {
    throw Error(ErrorCode::kZeroVector, "zero vector for '" + std::string(id) + "'");
  }
  for (float& x : row) x = static_cast<float>(static_cast<double>(x) / norm);
}

void check_unit_norm(std::span<const float> row, std::string_view id) {
  double sq = 0.0;
  for (float x : row) {
    if (!std::isfinite(x)) {
      throw Error(ErrorCode::kNonFiniteValue, "non-finite component in '" + std::string(id) + "'");
    }
    sq += static_cast<double>(x) * static_cast<double>(x);
  }
  const double norm = std::sqrt(sq);
  if (std::fabs(norm - 1.0) > kNormTolerance) {
    throw Error(ErrorCode::kNormOutOfTolerance,
                "vector '" + std::string(id) + "' has norm " + std::to_string(norm));
  }
}

namespace {
ordered_json nullable(const std::optional<std::string>& s) {
  return s ? ordered_json(*s) : ordered_json(nullptr);
}
}  // namespace

std::string item_meta_line(const ItemMeta& meta) {
  ordered_json j;
  j["id"] = meta.id;
  j["modality"] = std::string(to_string(meta.modality));
  j["text"] = nullable(meta.text);
  j["uri"] = nullable(meta.uri);
  return j.dump();
}

std::string query_meta_line(const QueryMeta& meta) {
  ordered_json j;
  j["id"] = meta.id;
  j["text"] = nullable(meta.text);
  j["uri"] = nullptr;
  if (meta.qtype) j["qtype"] = std::string(to_string(*meta.qtype));
  return j.dump();
}

const json& require(const json& obj, const char* key, ErrorCode on_error) {
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(on_error, std::string("missing field '") + key + "'");
  return *it;
}

std::optional<std::string> optional_string(const json& obj, const char* key, ErrorCode on_error) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw Error(on_error, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

RawBlock read_block(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  const json manifest = json::parse(read_file(manifest_path), nullptr, false);
  if (manifest.is_discarded() || !manifest.is_object()) {
    throw Error(ErrorCode::kCorruptManifest, manifest_path.string() + " is not a JSON object");
  }
  const auto& format = require(manifest, "format", ErrorCode::kCorruptManifest);
  if (!format.is_string() || format.get<std::string>() != kStoreFormat) {
    throw Error(ErrorCode::kCorruptManifest, "unsupported format in " + manifest_path.string());
  }
  const auto& dim_field = require(manifest, "dim", ErrorCode::kCorruptManifest);
  const auto& count_field = require(manifest, "count", ErrorCode::kCorruptManifest);
  const auto& normalized = require(manifest, "normalized", ErrorCode::kCorruptManifest);
  const auto& sha = require(manifest, "sha256_vectors", ErrorCode::kCorruptManifest);
  if (!dim_field.is_number_unsigned() || !count_field.is_number_unsigned() ||
      !normalized.is_boolean() || !normalized.get<bool>() || !sha.is_string()) {
    throw Error(ErrorCode::kCorruptManifest, "malformed fields in " + manifest_path.string());
  }

  RawBlock block;
  block.dim = dim_field.get<std::size_t>();
  block.count = count_field.get<std::size_t>();
  if (block.dim == 0) throw Error(ErrorCode::kCorruptManifest, "manifest dim must be >= 1");

  const std::string bytes = read_file(dir / "vectors.f32le");
  const std::size_t expected = block.count * block.dim * sizeof(float);
  if (bytes.size() != expected) {
    const std::size_t row_bytes = block.count * sizeof(float);
    if (block.count > 0 && bytes.size() > 0 && bytes.size() % row_bytes == 0) {
      throw Error(ErrorCode::kDimMismatch,
                  "manifest dim=" + std::to_string(block.dim) + " but vector block holds d=" +
                      std::to_string(bytes.size() / row_bytes) + " rows");
    }
    throw Error(ErrorCode::kCorruptManifest,
                "vector block is " + std::to_string(bytes.size()) + " bytes, expected " +
                    std::to_string(expected));
  }
  if (sha256_hex(std::as_bytes(std::span(bytes.data(), bytes.size()))) != sha.get<std::string>()) {
    throw Error(ErrorCode::kChecksumMismatch, "vector block checksum mismatch in " + dir.string());
  }
  block.vectors = decode_f32le(bytes);

  block.meta = read_jsonl(dir / "meta.jsonl", ErrorCode::kCorruptManifest);
  if (block.meta.size() != block.count) {
    throw Error(ErrorCode::kCorruptManifest,
                "meta.jsonl has " + std::to_string(block.meta.size()) + " rows, manifest says " +
                    std::to_string(block.count));
  }
  return block;
}

void write_block(const fs::path& dir, std::size_t dim, std::span<const std::string> meta_lines,
                 std::span<const float> vectors) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create directory " + dir.string());

  const std::string bytes = encode_f32le(vectors);
  ordered_json manifest;
  manifest["format"] = std::string(kStoreFormat);
  manifest["dim"] = dim;
  manifest["count"] = meta_lines.size();
  manifest["normalized"] = true;
  manifest["sha256_vectors"] = sha256_hex(std::as_bytes(std::span(bytes.data(), bytes.size())));

  std::string meta;
  for (const auto& line : meta_lines) {
    meta += line;
    meta += '\n';
  }
  write_file(dir / "vectors.f32le", bytes);
  write_file(dir / "meta.jsonl", meta);
  write_file(dir / "manifest.json", manifest.dump() + "\n");
}

}  // namespace gapbridge::detail
