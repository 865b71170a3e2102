#include "cui/sse.hpp"

#include <utility>

namespace cui::remote {

// Consumes line_ as one complete line (terminator already stripped).
void SseParser::take_line() {
    std::string_view line = line_;
    if (line.empty()) {
        // Blank line: event boundary. Events with no data field are ignored
        // (comment-only keep-alives).
        if (have_data_) {
            ready_.push_back(std::move(data_));
        }
        data_.clear();
        have_data_ = false;
    } else if (line.starts_with("data:")) {
        line.remove_prefix(5);
        if (line.starts_with(" ")) line.remove_prefix(1);
        if (have_data_) data_ += '\n';
        data_.append(line);
        have_data_ = true;
    }
    // Other fields (event:, id:, retry:, ": comment") are irrelevant here.
    line_.clear();
}

std::vector<std::string> SseParser::feed(std::string_view bytes) {
    for (const char c : bytes) {
        if (c == '\n') {
            if (!line_.empty() && line_.back() == '\r') line_.pop_back();
            take_line();
        } else {
            line_ += c;
        }
    }
    return std::exchange(ready_, {});
}

std::vector<std::string> SseParser::finish() {
    if (!line_.empty()) take_line();
    if (have_data_) {
        ready_.push_back(std::move(data_));
        data_.clear();
        have_data_ = false;
    }
    return std::exchange(ready_, {});
}

} // namespace cui::remote
