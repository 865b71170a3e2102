#include "cui/providers.hpp"

#include "cui/detail/utf8.hpp"
#include "cui/errors.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <thread>

namespace cui::providers {

namespace {

void sleep_ms(int ms) {
    if (ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(ms));
}

int read_param(const nlohmann::json& params, const char* key, int fallback,
               int minimum) {
    const auto it = params.find(key);
    if (it == params.end()) return fallback;
    if (!it->is_number_integer()) {
        throw ConfigError(std::string("provider param '") + key +
                          "' must be an integer");
    }
    const int value = it->get<int>();
    if (value < minimum) {
        throw ConfigError(std::string("provider param '") + key +
                          "' must be >= " + std::to_string(minimum));
    }
    return value;
}

std::string sentence_ordinal(int index) {
    static const char* kWords[] = {"two", "three", "four",  "five",
                                   "six", "seven", "eight", "nine",
                                   "ten", "eleven", "twelve"};
    if (index >= 2 && index <= 12) return kWords[index - 2];
    return std::to_string(index);
}

class MockStt final : public SttProvider {
public:
    explicit MockStt(const MockParams& params) : delay_ms_(params.stt_ms) {}

    std::string transcribe(std::span<const std::uint8_t> audio,
                           const AudioFormat&) override {
        sleep_ms(delay_ms_);
        std::string text(reinterpret_cast<const char*>(audio.data()),
                         audio.size());
        if (!detail::utf8_valid(text)) {
            throw ProviderError("stt", "audio bytes are not valid UTF-8 text");
        }
        return text;
    }

private:
    int delay_ms_;
};

class MockLlm final : public LlmProvider {
public:
    explicit MockLlm(const MockParams& params)
        : initial_ms_(params.llm_initial_ms),
          inter_ms_(params.llm_inter_sentence_ms),
          sentences_(params.llm_sentences) {}

    void generate(const std::vector<LlmMessage>& messages, const std::string&,
                  const DeltaSink& on_delta) override {
        std::string system_prompt;
        std::string user_text;
        for (const auto& m : messages) {
            if (m.role == LlmMessage::Role::system) system_prompt = m.content;
            if (m.role == LlmMessage::Role::user) user_text = m.content;
        }
        const auto deltas =
            mock_llm_deltas(system_prompt, user_text, sentences_);
        sleep_ms(initial_ms_);
        for (std::size_t i = 0; i < deltas.size(); ++i) {
            if (i > 0) sleep_ms(inter_ms_);
            if (!on_delta(deltas[i])) return;
        }
    }

private:
    int initial_ms_;
    int inter_ms_;
    int sentences_;
};

class MockTts final : public TtsProvider {
public:
    explicit MockTts(const MockParams& params)
        : delay_ms_(params.tts_per_call_ms) {}

    void synthesize(std::string_view text, const std::string& voice,
                    const AudioFormat& format,
                    const AudioChunkSink& on_chunk) override {
        if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
            throw ProviderError("tts", "refusing to synthesize blank text");
        }
        sleep_ms(delay_ms_);

        const double freq = voice == "low" ? 220.0 : 440.0;
        const auto rate = static_cast<std::int64_t>(format.sample_rate);
        const auto chars =
            static_cast<std::int64_t>(detail::utf8_length(text));
        const std::int64_t duration_ms = std::max<std::int64_t>(100, 25 * chars);
        const std::int64_t samples = rate * duration_ms / 1000;

        std::vector<std::uint8_t> chunk;
        chunk.reserve(kChunkBytes);
        for (std::int64_t k = 0; k < samples; ++k) {
            const double phase =
                2.0 * std::numbers::pi * freq * static_cast<double>(k) /
                static_cast<double>(rate);
            const auto sample =
                static_cast<std::int16_t>(std::lround(16383.0 * std::sin(phase)));
            chunk.push_back(static_cast<std::uint8_t>(sample & 0xFF));
            chunk.push_back(
                static_cast<std::uint8_t>((sample >> 8) & 0xFF));
            if (chunk.size() == kChunkBytes) {
                if (!on_chunk(chunk)) return;
                chunk.clear();
            }
        }
        if (!chunk.empty()) on_chunk(chunk);
    }

private:
    static constexpr std::size_t kChunkBytes = 4096;

    int delay_ms_;
};

} // namespace

std::string_view role_name(LlmMessage::Role role) {
    switch (role) {
    case LlmMessage::Role::system: return "system";
    case LlmMessage::Role::user: return "user";
    case LlmMessage::Role::assistant: return "assistant";
    }
    return "unknown";
}

MockParams parse_mock_params(const nlohmann::json& provider_params) {
    MockParams out;
    if (provider_params.is_null()) return out;
    if (!provider_params.is_object()) {
        throw ConfigError("provider_params must be an object");
    }
    out.stt_ms = read_param(provider_params, "stt_ms", 0, 0);
    out.llm_initial_ms = read_param(provider_params, "llm_initial_ms", 0, 0);
    out.llm_inter_sentence_ms =
        read_param(provider_params, "llm_inter_sentence_ms", 0, 0);
    out.tts_per_call_ms = read_param(provider_params, "tts_per_call_ms", 0, 0);
    out.llm_sentences = read_param(provider_params, "llm_sentences", 3, 1);
    return out;
}

std::vector<std::string> mock_llm_deltas(const std::string& system_prompt,
                                         const std::string& user_text,
                                         int sentences) {
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(std::max(sentences, 1)));

    std::string first;
    if (!system_prompt.empty()) {
        first += "[sys:";
        first += detail::utf8_prefix(system_prompt, 10);
        first += "] ";
    }
    first += "You said: " + user_text + ".";
    out.push_back(std::move(first));

    for (int i = 2; i <= sentences; ++i) {
        out.push_back("This is sentence " + sentence_ordinal(i) + ".");
    }
    // Every delta but the last carries the trailing space that separates it
    // from the next sentence.
    for (std::size_t i = 0; i + 1 < out.size(); ++i) {
        out[i] += ' ';
    }
    return out;
}

std::shared_ptr<SttProvider> make_mock_stt(const MockParams& params) {
    return std::make_shared<MockStt>(params);
}

std::shared_ptr<LlmProvider> make_mock_llm(const MockParams& params) {
    return std::make_shared<MockLlm>(params);
}

std::shared_ptr<TtsProvider> make_mock_tts(const MockParams& params) {
    return std::make_shared<MockTts>(params);
}

} // namespace cui::providers
