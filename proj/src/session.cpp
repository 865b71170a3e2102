#include "cui/session.hpp"

#include "cui/errors.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <random>

namespace cui::session {

namespace {

using nlohmann::json;

std::string iso8601_utc_now() {
    using namespace std::chrono;
    const auto now = system_clock::now();
    const auto secs = time_point_cast<seconds>(now);
    const auto ms = duration_cast<milliseconds>(now - secs).count();
    const std::time_t t = system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[40];
    const std::size_t n = std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%S", &tm);
    std::snprintf(buf + n, sizeof(buf) - n, ".%03dZ", static_cast<int>(ms));
    return buf;
}

std::string generate_session_id() {
    static std::atomic<std::uint32_t> counter{0};
    static const std::uint64_t seed = [] {
        std::random_device rd;
        return (static_cast<std::uint64_t>(rd()) << 32) | rd();
    }();
    std::mt19937_64 rng(seed + counter.fetch_add(1));
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(rng()));
    return buf;
}

void set_optional(json& doc, const char* key, std::optional<double> v) {
    if (v) doc[key] = *v;
}

std::optional<double> get_optional(const json& doc, const char* key) {
    const auto it = doc.find(key);
    if (it == doc.end() || it->is_null()) return std::nullopt;
    return it->get<double>();
}

void replace_all(std::string& text, const std::string& needle,
                 const std::string& replacement) {
    if (needle.empty()) return;
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        text.replace(pos, needle.size(), replacement);
        pos += replacement.size();
    }
}

} // namespace

json turn_record_to_json(const TurnRecord& record) {
    json metrics = json::object();
    set_optional(metrics, "stt_ms", record.metrics.stt_ms);
    set_optional(metrics, "llm_first_delta_ms",
                 record.metrics.llm_first_delta_ms);
    set_optional(metrics, "ttfa_ms", record.metrics.ttfa_ms);
    set_optional(metrics, "total_ms", record.metrics.total_ms);

    json doc{{"timestamp", record.timestamp},
             {"session_id", record.session_id},
             {"session_label", record.session_label},
             {"turn_index", record.turn_index},
             {"transcript", record.transcript},
             {"response_text", record.response_text},
             {"metrics", metrics}};
    if (!record.error.empty()) doc["error"] = record.error;
    if (record.aborted) doc["aborted"] = true;
    return doc;
}

TurnRecord turn_record_from_json(const json& doc) {
    TurnRecord out;
    out.timestamp = doc.at("timestamp").get<std::string>();
    out.session_id = doc.at("session_id").get<std::string>();
    out.session_label = doc.at("session_label").get<std::string>();
    out.turn_index = doc.at("turn_index").get<int>();
    out.transcript = doc.at("transcript").get<std::string>();
    out.response_text = doc.at("response_text").get<std::string>();
    if (const auto it = doc.find("metrics"); it != doc.end()) {
        out.metrics.stt_ms = get_optional(*it, "stt_ms");
        out.metrics.llm_first_delta_ms = get_optional(*it, "llm_first_delta_ms");
        out.metrics.ttfa_ms = get_optional(*it, "ttfa_ms");
        out.metrics.total_ms = get_optional(*it, "total_ms");
    }
    if (const auto it = doc.find("error"); it != doc.end()) {
        out.error = it->get<std::string>();
    }
    if (const auto it = doc.find("aborted"); it != doc.end()) {
        out.aborted = it->get<bool>();
    }
    return out;
}

TurnLog::TurnLog(std::string path) : path_(std::move(path)) {}

void TurnLog::write(const TurnRecord& record,
                    std::span<const std::string> secrets) {
    if (path_.empty()) return;

    TurnRecord scrubbed = record;
    for (const auto& secret : secrets) {
        if (secret.empty()) continue;
        replace_all(scrubbed.transcript, secret, "[redacted]");
        replace_all(scrubbed.response_text, secret, "[redacted]");
        replace_all(scrubbed.error, secret, "[redacted]");
        replace_all(scrubbed.session_label, secret, "[redacted]");
    }
    // JSON strings never contain raw newlines, so one record is one line.
    const std::string line = turn_record_to_json(scrubbed).dump();

    std::lock_guard lock(mutex_);
    std::ofstream out(path_, std::ios::app);
    if (out) {
        out << line << '\n';
        out.flush();
    }
    if (!out && !warned_) {
        warned_ = true;
        std::fprintf(stderr, "warning: cannot append turn log '%s'\n",
                     path_.c_str());
    }
}

Session::Session(SessionConfig config,
                 const providers::ProviderRegistry& registry)
    : config_(std::move(config)),
      id_(generate_session_id()),
      history_(config_.max_history_turns) {
    if (config_.session_label.empty()) {
        config_.session_label = "session-" + id_.substr(0, 6);
    }
    const auto context = [this](const providers::ProviderSelector& sel) {
        providers::ResolveContext ctx;
        ctx.selector = sel;
        if (const auto it = config_.api_keys.find(sel.provider);
            it != config_.api_keys.end()) {
            ctx.api_key = it->second;
        }
        ctx.provider_params = config_.provider_params;
        return ctx;
    };
    stt_ = registry.resolve_stt(context(config_.stt));
    llm_ = registry.resolve_llm(context(config_.llm));
    tts_ = registry.resolve_tts(context(config_.tts));
}

std::vector<providers::LlmMessage>
Session::render_prompt(const std::string& user_text) const {
    using providers::LlmMessage;
    std::vector<LlmMessage> out;
    out.reserve(2 * history_.size() + 2);
    if (!config_.system_prompt.empty()) {
        out.push_back({LlmMessage::Role::system, config_.system_prompt});
    }
    if (config_.history_enabled) {
        for (const auto& [user, assistant] : history_.turns()) {
            out.push_back({LlmMessage::Role::user, user});
            out.push_back({LlmMessage::Role::assistant, assistant});
        }
    }
    out.push_back({LlmMessage::Role::user, user_text});
    return out;
}

TurnRecord Session::commit_turn(std::string transcript,
                                std::string response_text, TurnMetrics metrics,
                                std::string error, bool aborted) {
    TurnRecord record;
    record.timestamp = iso8601_utc_now();
    record.session_id = id_;
    record.session_label = config_.session_label;
    record.turn_index = turn_index_;
    record.transcript = std::move(transcript);
    record.response_text = std::move(response_text);
    record.metrics = metrics;
    record.error = std::move(error);
    record.aborted = aborted;

    // Aborted turns never reached the client in full and empty replies add
    // nothing, so neither becomes conversation context.
    if (config_.history_enabled && !aborted && !record.response_text.empty()) {
        history_.add_turn(record.transcript, record.response_text);
    }
    ++turn_index_;
    return record;
}

void Session::reset_history() { history_.clear(); }

std::vector<std::string> Session::secret_values() const {
    std::vector<std::string> out;
    out.reserve(config_.api_keys.size());
    for (const auto& [name, value] : config_.api_keys) {
        if (!value.empty()) out.push_back(value);
    }
    return out;
}

} // namespace cui::session
