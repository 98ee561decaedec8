#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace gapbridge {

enum class Modality : std::uint8_t { kText = 0, kImage = 1 };

inline constexpr std::array<Modality, 2> kModalities = {Modality::kText,
                                                        Modality::kImage};

constexpr std::size_t index_of(Modality m) noexcept {
  return static_cast<std::size_t>(m);
}

std::string_view to_string(Modality m) noexcept;
/// Accepts "text" / "image"; throws Error(kBadConfig) otherwise.
Modality parse_modality(std::string_view s);

/// Question type of an evaluation query: which modality its answer lives in.
enum class QueryType : std::uint8_t { kTextQ = 0, kImageQ = 1 };

std::string_view to_string(QueryType t) noexcept;
QueryType parse_query_type(std::string_view s);

}  // namespace gapbridge
