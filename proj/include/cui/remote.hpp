#pragma once

#include "cui/providers.hpp"
#include "cui/registry.hpp"

#include <memory>
#include <string>

namespace cui::remote {

// Connection details for an OpenAI-compatible HTTP backend. `endpoint` is
// scheme://host[:port][/prefix]; paths below are appended to the prefix.
struct RemoteOptions {
    std::string endpoint;
    std::string model;
    std::string api_key;
    int connect_timeout_ms = 5000;
    int read_timeout_ms = 30000;
    int max_retries = 2; // transport errors only, never HTTP statuses
};

// Builds options from a session's selector + key and validates them.
// Throws ConfigError when the endpoint is missing or not http(s).
RemoteOptions make_remote_options(const providers::ResolveContext& ctx);

// POST {prefix}/v1/audio/transcriptions — multipart WAV upload.
std::shared_ptr<providers::SttProvider>
make_remote_stt(const RemoteOptions& options);

// POST {prefix}/v1/chat/completions with "stream": true, SSE response.
std::shared_ptr<providers::LlmProvider>
make_remote_llm(const RemoteOptions& options);

// POST {prefix}/v1/audio/speech — body streamed as PCM chunks.
std::shared_ptr<providers::TtsProvider>
make_remote_tts(const RemoteOptions& options);

// "sk-abcd1234" -> "sk-a…"; empty stays empty. For logs and errors only.
std::string redact_secret(std::string_view secret);

} // namespace cui::remote
