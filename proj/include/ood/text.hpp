#pragma once

#include <string>
#include <string_view>

namespace ood {

// Canonical form used for every answer comparison: surrounding ASCII
// whitespace trimmed, ASCII letters lowercased. Non-ASCII bytes are kept.
std::string normalize_answer(std::string_view answer);

// RFC 4180 field quoting; fields without separators pass through unchanged.
std::string csv_field(std::string_view field);

// Fixed-notation rendering with `digits` decimals, for human-facing output.
std::string format_fixed(double value, int digits);

}  // namespace ood
