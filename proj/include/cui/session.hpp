#pragma once

#include "cui/config.hpp"
#include "cui/history.hpp"
#include "cui/providers.hpp"
#include "cui/registry.hpp"

#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cui::session {

struct TurnMetrics {
    std::optional<double> stt_ms;
    std::optional<double> llm_first_delta_ms;
    std::optional<double> ttfa_ms;
    std::optional<double> total_ms;

    bool operator==(const TurnMetrics&) const = default;
};

// One committed exchange, exactly what the turn log stores per line.
struct TurnRecord {
    std::string timestamp; // UTC ISO 8601
    std::string session_id;
    std::string session_label;
    int turn_index = 0;
    std::string transcript;
    std::string response_text;
    TurnMetrics metrics;
    std::string error; // empty when the turn completed cleanly
    bool aborted = false;

    bool operator==(const TurnRecord&) const = default;
};

nlohmann::json turn_record_to_json(const TurnRecord& record);
TurnRecord turn_record_from_json(const nlohmann::json& doc);

// Append-only JSONL sink shared by all connections. Each record is one line,
// flushed immediately. Secret values are replaced by redacted placeholders
// before serialization. Write failures are reported once to stderr and
// never interrupt a conversation.
class TurnLog {
public:
    TurnLog() = default; // disabled
    explicit TurnLog(std::string path);

    bool enabled() const { return !path_.empty(); }
    const std::string& path() const { return path_; }

    void write(const TurnRecord& record,
               std::span<const std::string> secrets = {});

private:
    std::string path_;
    std::mutex mutex_;
    bool warned_ = false;
};

// One connection's conversation state: pinned config, resolved providers,
// and the bounded history the prompt is rendered from.
class Session {
public:
    // Resolves the three providers through `registry`; throws ConfigError.
    Session(SessionConfig config, const providers::ProviderRegistry& registry);

    const std::string& id() const { return id_; }
    const SessionConfig& config() const { return config_; }

    providers::SttProvider& stt() { return *stt_; }
    providers::LlmProvider& llm() { return *llm_; }
    providers::TtsProvider& tts() { return *tts_; }

    int turn_index() const { return turn_index_; }
    std::size_t history_size() const { return history_.size(); }

    // system prompt (if any) + alternating history + the new user message.
    // With history disabled only the system prompt and the new message.
    std::vector<providers::LlmMessage>
    render_prompt(const std::string& user_text) const;

    // Stamps and returns the record, appends to history when enabled and the
    // turn was neither aborted nor failed, then advances the turn index.
    TurnRecord commit_turn(std::string transcript, std::string response_text,
                           TurnMetrics metrics, std::string error = {},
                           bool aborted = false);

    void reset_history();

    // Configured api key values, for log redaction.
    std::vector<std::string> secret_values() const;

private:
    SessionConfig config_;
    std::string id_;
    std::shared_ptr<providers::SttProvider> stt_;
    std::shared_ptr<providers::LlmProvider> llm_;
    std::shared_ptr<providers::TtsProvider> tts_;
    ConversationHistory history_;
    int turn_index_ = 0;
};

} // namespace cui::session
