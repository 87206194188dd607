#pragma once

#include <string_view>

namespace betasplit {

/// Discrete model: every edge has length 1. Continuous model: a block of
/// size k waits an Exp(theta(k-1)) time before splitting.
enum class Variant { discrete, continuous };

std::string_view to_string(Variant v);
/// Parses "discrete" / "continuous"; throws ConfigError otherwise.
Variant parse_variant(std::string_view text);

}  // namespace betasplit
