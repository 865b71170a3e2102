#include "cui/remote.hpp"

#include "cui/audio.hpp"
#include "cui/errors.hpp"
#include "cui/sse.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <thread>

namespace cui::remote {

namespace {

using nlohmann::json;

// scheme://host[:port] for the HTTP client, plus an optional path prefix
// request paths get appended to.
struct EndpointParts {
    std::string base;
    std::string prefix;
};

EndpointParts split_endpoint(const std::string& endpoint) {
    const auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("endpoint '" + endpoint +
                          "' must start with http:// or https://");
    }
    const std::string scheme = endpoint.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        throw ConfigError("endpoint scheme '" + scheme + "' is not supported");
    }
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (scheme == "https") {
        throw ConfigError("built without TLS support; use an http endpoint");
    }
#endif
    const auto path_start = endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {endpoint, ""};
    }
    std::string prefix = endpoint.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {endpoint.substr(0, path_start), prefix};
}

int param_ms(const json& params, const char* key, int fallback) {
    if (!params.is_object()) return fallback;
    const auto it = params.find(key);
    if (it == params.end()) return fallback;
    if (!it->is_number_integer() || it->get<int>() <= 0) {
        throw ConfigError(std::string("provider param '") + key +
                          "' must be a positive integer");
    }
    return it->get<int>();
}

std::string scrub(std::string text, const std::string& secret) {
    if (secret.empty()) return text;
    std::size_t pos = 0;
    while ((pos = text.find(secret, pos)) != std::string::npos) {
        const std::string replacement = redact_secret(secret);
        text.replace(pos, secret.size(), replacement);
        pos += replacement.size();
    }
    return text;
}

bool transport_retriable(httplib::Error err) {
    switch (err) {
    case httplib::Error::Connection:
    case httplib::Error::ConnectionTimeout:
    case httplib::Error::Read:
    case httplib::Error::Write:
        return true;
    default:
        return false;
    }
}

// Shared plumbing: one configured httplib client per request, uniform error
// mapping, bounded retries on transport failures.
class RemoteBase {
protected:
    RemoteBase(std::string stage, RemoteOptions options)
        : stage_(std::move(stage)),
          options_(std::move(options)),
          parts_(split_endpoint(options_.endpoint)) {}

    std::unique_ptr<httplib::Client> make_client() const {
        auto cli = std::make_unique<httplib::Client>(parts_.base);
        cli->set_connection_timeout(
            std::chrono::milliseconds(options_.connect_timeout_ms));
        cli->set_read_timeout(
            std::chrono::milliseconds(options_.read_timeout_ms));
        cli->set_write_timeout(
            std::chrono::milliseconds(options_.read_timeout_ms));
        if (!options_.api_key.empty()) {
            cli->set_default_headers(
                {{"Authorization", "Bearer " + options_.api_key}});
        }
        return cli;
    }

    std::string url(const char* path) const { return parts_.prefix + path; }

    [[noreturn]] void throw_transport(const char* path,
                                      httplib::Error err) const {
        const bool timeout = err == httplib::Error::ConnectionTimeout;
        throw ProviderError(stage_,
                            "POST " + parts_.base + url(path) +
                                " failed: " + httplib::to_string(err),
                            0, timeout);
    }

    [[noreturn]] void throw_status(const char* path, int status,
                                   const std::string& body) const {
        std::string detail = scrub(body.substr(0, 300), options_.api_key);
        std::string message = "POST " + parts_.base + url(path) +
                              " returned HTTP " + std::to_string(status);
        if (!detail.empty()) message += ": " + detail;
        throw ProviderError(stage_, message, status);
    }

    // Runs `attempt` up to 1 + max_retries times. The callee reports whether
    // any response data was consumed; once it was, the request is not safe
    // to repeat and the error surfaces immediately.
    template <typename Attempt> void with_retries(Attempt&& attempt) const {
        int tries = 0;
        while (true) {
            bool consumed = false;
            retriable_flag_ = false;
            try {
                attempt(consumed);
                return;
            } catch (const ProviderError& e) {
                ++tries;
                const bool retriable = e.http_status() == 0 &&
                                       retriable_flag_ && !consumed &&
                                       tries <= options_.max_retries;
                if (!retriable) throw;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(50 * tries));
        }
    }

    void set_retriable(bool value) { retriable_flag_ = value; }

    std::string stage_;
    RemoteOptions options_;
    EndpointParts parts_;

private:
    mutable bool retriable_flag_ = false;
};

class RemoteStt final : public providers::SttProvider, RemoteBase {
public:
    explicit RemoteStt(RemoteOptions options)
        : RemoteBase("stt", std::move(options)) {}

    std::string transcribe(std::span<const std::uint8_t> audio,
                           const AudioFormat& format) override {
        const auto header =
            wav::build_header(format, static_cast<std::uint32_t>(audio.size()));
        std::string file(header.begin(), header.end());
        file.append(reinterpret_cast<const char*>(audio.data()), audio.size());

        httplib::MultipartFormDataItems items = {
            {"file", std::move(file), "utterance.wav", "audio/wav"},
            {"model", options_.model, "", ""},
        };

        std::string text;
        with_retries([&](bool& consumed) {
            auto cli = make_client();
            auto res = cli->Post(url("/v1/audio/transcriptions"), items);
            if (!res) {
                set_retriable(transport_retriable(res.error()));
                throw_transport("/v1/audio/transcriptions", res.error());
            }
            consumed = true;
            if (res->status < 200 || res->status >= 300) {
                throw_status("/v1/audio/transcriptions", res->status, res->body);
            }
            const json doc = json::parse(res->body, nullptr, false);
            if (doc.is_discarded() || !doc.contains("text") ||
                !doc["text"].is_string()) {
                throw ProviderError(stage_,
                                    "transcription response has no text field");
            }
            text = doc["text"].get<std::string>();
        });
        return text;
    }
};

class RemoteLlm final : public providers::LlmProvider, RemoteBase {
public:
    explicit RemoteLlm(RemoteOptions options)
        : RemoteBase("llm", std::move(options)) {}

    void generate(const std::vector<providers::LlmMessage>& messages,
                  const std::string& model,
                  const providers::DeltaSink& on_delta) override {
        json body{{"model", model.empty() ? options_.model : model},
                  {"stream", true}};
        auto& msgs = body["messages"] = json::array();
        for (const auto& m : messages) {
            msgs.push_back({{"role", providers::role_name(m.role)},
                            {"content", m.content}});
        }
        const std::string payload = body.dump();

        with_retries([&](bool& consumed) {
            stream_once(payload, on_delta, consumed);
        });
    }

private:
    void stream_once(const std::string& payload,
                     const providers::DeltaSink& on_delta, bool& consumed) {
        auto cli = make_client();

        SseParser parser;
        int status = 0;
        std::string error_body;
        bool done = false;
        bool stopped = false;
        std::string bad_event;

        httplib::Request req;
        req.method = "POST";
        req.path = url("/v1/chat/completions");
        req.body = payload;
        req.set_header("Content-Type", "application/json");
        req.set_header("Accept", "text/event-stream");
        req.response_handler = [&](const httplib::Response& res) {
            status = res.status;
            return true;
        };
        req.content_receiver = [&](const char* data, std::size_t len,
                                   std::uint64_t, std::uint64_t) {
            if (status < 200 || status >= 300) {
                if (error_body.size() < 1024) error_body.append(data, len);
                return true;
            }
            consumed = true;
            for (auto& event : parser.feed({data, len})) {
                if (event == kSseDone) {
                    done = true;
                    return false; // orderly end; stop reading
                }
                if (!deliver(event, on_delta, bad_event)) {
                    stopped = !bad_event.empty() ? false : true;
                    return false;
                }
            }
            return true;
        };

        auto res = cli->send(req);
        if (!bad_event.empty()) {
            throw ProviderError(stage_, "malformed stream event: " +
                                            scrub(bad_event, options_.api_key));
        }
        if (done || stopped) return;
        if (!res && res.error() != httplib::Error::Canceled) {
            set_retriable(transport_retriable(res.error()));
            throw_transport("/v1/chat/completions", res.error());
        }
        if (status < 200 || status >= 300) {
            throw_status("/v1/chat/completions", status, error_body);
        }
        // Stream closed without [DONE]: flush any final unterminated event
        // and accept what we got.
        for (auto& event : parser.finish()) {
            if (event == kSseDone) break;
            if (!deliver(event, on_delta, bad_event)) break;
        }
        if (!bad_event.empty()) {
            throw ProviderError(stage_, "malformed stream event: " +
                                            scrub(bad_event, options_.api_key));
        }
    }

    // Parses one SSE event and forwards its delta text. Returns false to
    // stop the stream (sink refusal or malformed payload, reported via
    // `bad_event`).
    static bool deliver(const std::string& event,
                        const providers::DeltaSink& on_delta,
                        std::string& bad_event) {
        const json doc = json::parse(event, nullptr, false);
        if (doc.is_discarded() || !doc.is_object()) {
            bad_event = event.substr(0, 200);
            return false;
        }
        const auto choices = doc.find("choices");
        if (choices == doc.end() || !choices->is_array() || choices->empty()) {
            return true; // e.g. usage-only chunk
        }
        const auto& delta = (*choices)[0].value("delta", json::object());
        const auto content = delta.find("content");
        if (content == delta.end() || !content->is_string()) {
            return true; // role announcements carry no text
        }
        return on_delta(content->get<std::string>());
    }
};

class RemoteTts final : public providers::TtsProvider, RemoteBase {
public:
    explicit RemoteTts(RemoteOptions options)
        : RemoteBase("tts", std::move(options)) {}

    void synthesize(std::string_view text, const std::string& voice,
                    const AudioFormat&,
                    const providers::AudioChunkSink& on_chunk) override {
        if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
            throw ProviderError(stage_, "refusing to synthesize blank text");
        }
        const json body{{"model", options_.model},
                        {"input", std::string(text)},
                        {"voice", voice},
                        {"response_format", "pcm"}};
        const std::string payload = body.dump();

        with_retries([&](bool& consumed) {
            stream_once(payload, on_chunk, consumed);
        });
    }

private:
    void stream_once(const std::string& payload,
                     const providers::AudioChunkSink& on_chunk,
                     bool& consumed) {
        auto cli = make_client();

        int status = 0;
        std::string error_body;
        bool stopped = false;
        std::size_t delivered = 0;

        httplib::Request req;
        req.method = "POST";
        req.path = url("/v1/audio/speech");
        req.body = payload;
        req.set_header("Content-Type", "application/json");
        req.response_handler = [&](const httplib::Response& res) {
            status = res.status;
            return true;
        };
        req.content_receiver = [&](const char* data, std::size_t len,
                                   std::uint64_t, std::uint64_t) {
            if (status < 200 || status >= 300) {
                if (error_body.size() < 1024) error_body.append(data, len);
                return true;
            }
            consumed = true;
            delivered += len;
            const auto* bytes = reinterpret_cast<const std::uint8_t*>(data);
            if (!on_chunk({bytes, len})) {
                stopped = true;
                return false;
            }
            return true;
        };

        auto res = cli->send(req);
        if (stopped) return;
        if (!res && res.error() != httplib::Error::Canceled) {
            set_retriable(transport_retriable(res.error()));
            throw_transport("/v1/audio/speech", res.error());
        }
        if (status < 200 || status >= 300) {
            throw_status("/v1/audio/speech", status, error_body);
        }
        if (delivered == 0) {
            throw ProviderError(stage_, "speech response contained no audio");
        }
    }
};

} // namespace

std::string redact_secret(std::string_view secret) {
    if (secret.empty()) return {};
    std::string out(secret.substr(0, 4));
    out += "\xE2\x80\xA6"; // ellipsis
    return out;
}

RemoteOptions make_remote_options(const providers::ResolveContext& ctx) {
    RemoteOptions out;
    out.endpoint = ctx.selector.endpoint;
    out.model = ctx.selector.model;
    out.api_key = ctx.api_key;
    if (out.endpoint.empty()) {
        throw ConfigError("provider '" + ctx.selector.provider +
                          "' requires an endpoint");
    }
    if (out.api_key.empty()) {
        throw ConfigError("provider '" + ctx.selector.provider +
                          "' requires an api key");
    }
    split_endpoint(out.endpoint); // validate eagerly
    out.connect_timeout_ms =
        param_ms(ctx.provider_params, "connect_timeout_ms", 5000);
    out.read_timeout_ms =
        param_ms(ctx.provider_params, "read_timeout_ms", 30000);
    return out;
}

std::shared_ptr<providers::SttProvider>
make_remote_stt(const RemoteOptions& options) {
    return std::make_shared<RemoteStt>(options);
}

std::shared_ptr<providers::LlmProvider>
make_remote_llm(const RemoteOptions& options) {
    return std::make_shared<RemoteLlm>(options);
}

std::shared_ptr<providers::TtsProvider>
make_remote_tts(const RemoteOptions& options) {
    return std::make_shared<RemoteTts>(options);
}

} // namespace cui::remote
