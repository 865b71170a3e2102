#pragma once

#include <cstddef>
#include <deque>
#include <string>
#include <utility>

namespace cui::session {

// Completed user/assistant exchanges, oldest first, bounded by max_turns
// (oldest evicted beyond that).
class ConversationHistory {
public:
    explicit ConversationHistory(std::size_t max_turns = 64);

    void add_turn(std::string user_text, std::string assistant_text);
    void clear();

    std::size_t size() const { return turns_.size(); }
    std::size_t max_turns() const { return max_turns_; }
    const std::deque<std::pair<std::string, std::string>>& turns() const {
        return turns_;
    }

private:
    std::size_t max_turns_;
    std::deque<std::pair<std::string, std::string>> turns_;
};

} // namespace cui::session
