#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cui::remote {

// Incremental server-sent-events parser, tolerant of arbitrary transport
// fragmentation: feed() may be called with any byte split and yields exactly
// the events completed so far. Only `data:` fields matter here; an event's
// multiple data lines are joined with '\n'. CRLF is accepted. The OpenAI
// "[DONE]" sentinel is surfaced as a normal event; callers check for it.
class SseParser {
public:
    // Data payloads of the events completed by this chunk, in order.
    std::vector<std::string> feed(std::string_view bytes);

    // Terminates a trailing unterminated event (stream closed mid-event).
    std::vector<std::string> finish();

    bool mid_event() const { return !data_.empty() || !line_.empty(); }

private:
    void take_line();

    std::string line_;  // current partial line
    std::string data_;  // data lines of the event being assembled
    bool have_data_ = false;
    std::vector<std::string> ready_;
};

inline constexpr std::string_view kSseDone = "[DONE]";

} // namespace cui::remote
