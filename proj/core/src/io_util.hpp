#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gapbridge/embedding_store.hpp"
#include "gapbridge/error.hpp"

namespace gapbridge::detail {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Parses one JSON object per non-empty line. Parse failures raise
/// `on_error` with the offending line number.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path, ErrorCode on_error);

std::string encode_f32le(std::span<const float> values);
std::vector<float> decode_f32le(std::string_view bytes);

/// Scales `row` to unit length in 64-bit, storing the result as float.
void normalize_row(std::span<float> row, std::string_view id);
/// Throws kNormOutOfTolerance / kNonFiniteValue for rows loaded from disk.
void check_unit_norm(std::span<const float> row, std::string_view id);

std::string item_meta_line(const ItemMeta& meta);
std::string query_meta_line(const QueryMeta& meta);

struct RawBlock {
  std::size_t dim = 0;
  std::size_t count = 0;
  std::vector<nlohmann::json> meta;
  std::vector<float> vectors;
};

/// Reads and cross-checks manifest.json, meta.jsonl and vectors.f32le.
RawBlock read_block(const std::filesystem::path& dir);
void write_block(const std::filesystem::path& dir, std::size_t dim,
                 std::span<const std::string> meta_lines, std::span<const float> vectors);

std::optional<std::string> optional_string(const nlohmann::json& obj, const char* key,
                                           ErrorCode on_error);
const nlohmann::json& require(const nlohmann::json& obj, const char* key, ErrorCode on_error);

}  // namespace gapbridge::detail
