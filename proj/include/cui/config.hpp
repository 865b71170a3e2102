#pragma once

#include "cui/audio.hpp"
#include "cui/registry.hpp"

#include <json.hpp>

#include <cstddef>
#include <map>
#include <string>
#include <string_view>

namespace cui::session {

// Everything a client pins for the lifetime of one connection. Defaults are
// a fully mocked pipeline at 16 kHz.
struct SessionConfig {
    std::string session_label; // auto-generated when left empty
    providers::ProviderSelector stt{"mock", {}, {}};
    providers::ProviderSelector llm{"mock", {}, {}};
    providers::ProviderSelector tts{"mock", {}, {}};
    std::string voice = "default";
    std::string system_prompt;
    bool history_enabled = true;
    bool streaming_enabled = true;
    std::size_t max_history_turns = 64;
    AudioFormat audio_in;
    AudioFormat audio_out;
    std::map<std::string, std::string> api_keys; // provider name -> key
    nlohmann::json provider_params = nlohmann::json::object();
};

// Parses the SESSION_CONFIG payload (UTF-8 JSON object). Provider entries
// may be an object {"provider", "model", "endpoint"} or a bare name string.
// Unknown keys are ignored; provider names are checked against `registry`.
// Throws ConfigError with a human-readable reason.
SessionConfig parse_session_config(std::string_view payload,
                                   const providers::ProviderRegistry& registry);

// The config a session actually runs with, re-serialized (api key values
// replaced by redacted placeholders).
nlohmann::json describe_session_config(const SessionConfig& config);

} // namespace cui::session
