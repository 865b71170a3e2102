#include "cui/segmenter.hpp"

namespace cui::pipeline {

namespace {

bool is_ws(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
}

// Length in bytes of a terminator starting at `i`, or 0. U+2026 is the
// three-byte sequence E2 80 A6; a partial suffix is not a terminator yet.
std::size_t terminator_len(const std::string& s, std::size_t i) {
    const char c = s[i];
    if (c == '.' || c == '!' || c == '?') return 1;
    if (static_cast<unsigned char>(c) == 0xE2 && i + 2 < s.size() &&
        static_cast<unsigned char>(s[i + 1]) == 0x80 &&
        static_cast<unsigned char>(s[i + 2]) == 0xA6) {
        return 3;
    }
    return 0;
}

std::string trim_leading(std::string_view s) {
    std::size_t b = 0;
    while (b < s.size() && is_ws(s[b])) ++b;
    return std::string(s.substr(b));
}

std::string trim_both(std::string_view s) {
    std::size_t b = 0;
    while (b < s.size() && is_ws(s[b])) ++b;
    std::size_t e = s.size();
    while (e > b && is_ws(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

} // namespace

std::vector<std::string> SentenceSegmenter::feed(std::string_view delta) {
    pending_.append(delta);

    std::vector<std::string> sentences;
    std::size_t start = 0;
    std::size_t i = 0;
    while (i < pending_.size()) {
        const std::size_t tlen = terminator_len(pending_, i);
        if (tlen == 0 || i + tlen >= pending_.size() || !is_ws(pending_[i + tlen])) {
            ++i;
            continue;
        }
        sentences.push_back(trim_leading(
            std::string_view(pending_).substr(start, i + tlen - start)));
        i += tlen;
        while (i < pending_.size() && is_ws(pending_[i])) ++i;
        start = i;
    }
    pending_.erase(0, start);
    return sentences;
}

std::optional<std::string> SentenceSegmenter::flush() {
    std::string tail = trim_both(pending_);
    pending_.clear();
    if (tail.empty()) return std::nullopt;
    return tail;
}

} // namespace cui::pipeline
