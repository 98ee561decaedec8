#include "gapbridge/modality.hpp"

#include <string>

#include "gapbridge/error.hpp"

namespace gapbridge {

std::string_view to_string(Modality m) noexcept {
  return m == Modality::kText ? "text" : "image";
}

Modality parse_modality(std::string_view s) {
  if (s == "text") return Modality::kText;
  if (s == "image") return Modality::kImage;
  throw Error(ErrorCode::kBadConfig, "unknown modality '" + std::string(s) + "'");
}

std::string_view to_string(QueryType t) noexcept {
  return t == QueryType::kTextQ ? "TextQ" : "ImageQ";
}

QueryType parse_query_type(std::string_view s) {
  if (s == "TextQ") return QueryType::kTextQ;
  if (s == "ImageQ") return QueryType::kImageQ;
  throw Error(ErrorCode::kBadConfig, "unknown question type '" + std::string(s) + "'");
}

}  // namespace gapbridge
