#include "betasplit/variant.hpp"

#include <string>

#include "betasplit/errors.hpp"

namespace betasplit {

std::string_view to_string(Variant v) {
  return v == Variant::discrete ? "discrete" : "continuous";
}

Variant parse_variant(std::string_view text) {
  if (text == "discrete") return Variant::discrete;
  if (text == "continuous") return Variant::continuous;
  throw ConfigError("unknown variant '" + std::string(text) + "'");
}

}  // namespace betasplit
