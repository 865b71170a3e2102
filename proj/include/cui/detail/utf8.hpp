#pragma once

#include <cstddef>
#include <string_view>

namespace cui::detail {

// Strict UTF-8 validation: rejects overlong forms, surrogates, > U+10FFFF.
bool utf8_valid(std::string_view s);

// Number of code points; counts malformed bytes as one point each so the
// result is always defined (callers validate first where it matters).
std::size_t utf8_length(std::string_view s);

// First `max_points` code points without splitting a multi-byte sequence.
std::string_view utf8_prefix(std::string_view s, std::size_t max_points);

} // namespace cui::detail
