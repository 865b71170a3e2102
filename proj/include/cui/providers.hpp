#pragma once

#include "cui/audio.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cui::providers {

struct LlmMessage {
    enum class Role { system, user, assistant };
    Role role;
    std::string content;

    bool operator==(const LlmMessage&) const = default;
};

std::string_view role_name(LlmMessage::Role role);

// Sinks return false to stop the stream early; providers must honor that by
// returning promptly without raising an error.
using DeltaSink = std::function<bool(std::string_view delta)>;
using AudioChunkSink = std::function<bool(std::span<const std::uint8_t> chunk)>;

class SttProvider {
public:
    virtual ~SttProvider() = default;

    // Transcribes a complete buffered utterance. Throws ProviderError.
    virtual std::string transcribe(std::span<const std::uint8_t> audio,
                                   const AudioFormat& format) = 0;
};

class LlmProvider {
public:
    virtual ~LlmProvider() = default;

    // Streams the reply as text deltas and returns once the stream is done.
    // Throws ProviderError; deltas already delivered stay delivered.
    virtual void generate(const std::vector<LlmMessage>& messages,
                          const std::string& model,
                          const DeltaSink& on_delta) = 0;
};

class TtsProvider {
public:
    virtual ~TtsProvider() = default;

    // Synthesizes one piece of text into PCM chunks. Throws ProviderError,
    // in particular for blank input.
    virtual void synthesize(std::string_view text, const std::string& voice,
                            const AudioFormat& format,
                            const AudioChunkSink& on_chunk) = 0;
};

// Tuning knobs for the deterministic mocks, read from the session's
// provider_params object. All delays default to zero.
struct MockParams {
    int stt_ms = 0;
    int llm_initial_ms = 0;
    int llm_inter_sentence_ms = 0;
    int tts_per_call_ms = 0;
    int llm_sentences = 3;
};

// Throws ConfigError on negative delays or llm_sentences < 1; unknown keys
// are ignored (the params object is shared by all providers).
MockParams parse_mock_params(const nlohmann::json& provider_params);

// The exact delta sequence the mock LLM will stream, exposed so tests and
// the latency harness can compute expected output up front.
std::vector<std::string> mock_llm_deltas(const std::string& system_prompt,
                                         const std::string& user_text,
                                         int sentences = 3);

std::shared_ptr<SttProvider> make_mock_stt(const MockParams& params);
std::shared_ptr<LlmProvider> make_mock_llm(const MockParams& params);
std::shared_ptr<TtsProvider> make_mock_tts(const MockParams& params);

} // namespace cui::providers
