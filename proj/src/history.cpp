#include "cui/history.hpp"

#include "cui/errors.hpp"

namespace cui::session {

ConversationHistory::ConversationHistory(std::size_t max_turns)
    : max_turns_(max_turns) {
    if (max_turns == 0) {
        throw ConfigError("history capacity must be at least one turn");
    }
}

void ConversationHistory::add_turn(std::string user_text,
                                   std::string assistant_text) {
    turns_.emplace_back(std::move(user_text), std::move(assistant_text));
    while (turns_.size() > max_turns_) {
        turns_.pop_front();
    }
}

void ConversationHistory::clear() { turns_.clear(); }

} // namespace cui::session
