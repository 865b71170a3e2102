#include "cui/detail/utf8.hpp"

namespace cui::detail {

namespace {

// Returns the sequence length at `i`, or 0 when invalid.
std::size_t sequence_length(std::string_view s, std::size_t i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) return 1;
    std::size_t len = 0;
    unsigned cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        return 0;
    }
    if (i + len > s.size()) return 0;
    for (std::size_t k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) return 0;
        cp = (cp << 6) | (b & 0x3F);
    }
    if (len == 2 && cp < 0x80) return 0;       // overlong
    if (len == 3 && cp < 0x800) return 0;
    if (len == 4 && cp < 0x10000) return 0;
    if (cp >= 0xD800 && cp <= 0xDFFF) return 0; // surrogate
    if (cp > 0x10FFFF) return 0;
    return len;
}

} // namespace

bool utf8_valid(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        const std::size_t len = sequence_length(s, i);
        if (len == 0) return false;
        i += len;
    }
    return true;
}

std::size_t utf8_length(std::string_view s) {
    std::size_t i = 0;
    std::size_t points = 0;
    while (i < s.size()) {
        const std::size_t len = sequence_length(s, i);
        i += len == 0 ? 1 : len;
        ++points;
    }
    return points;
}

std::string_view utf8_prefix(std::string_view s, std::size_t max_points) {
    std::size_t i = 0;
    std::size_t points = 0;
    while (i < s.size() && points < max_points) {
        const std::size_t len = sequence_length(s, i);
        i += len == 0 ? 1 : len;
        ++points;
    }
    return s.substr(0, i);
}

} // namespace cui::detail
