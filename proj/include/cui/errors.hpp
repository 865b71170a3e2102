#pragma once

#include <stdexcept>
#include <string>

namespace cui {

// Base class for all gateway errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Session configuration rejected: malformed JSON, missing required key,
// unknown provider, illegal audio format. Carries a human-readable reason
// suitable for sending back to the client.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Wire-level violation. `kind` lets the server pick the right error code
// for the reply frame.
class ProtocolError : public Error {
public:
    enum class Kind {
        unknown_type,   // frame type byte not in the message table
        oversize,       // declared payload length exceeds the decoder limit
        poisoned,       // decoder already failed; no further feeds accepted
        malformed,      // anything else structurally wrong
    };

    ProtocolError(Kind kind, const std::string& message)
        : Error(message), kind_(kind) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// STT/LLM/TTS provider failure. `stage` names the pipeline stage the
// provider serves ("stt", "llm", "tts"); http_status is 0 when the failure
// was not an HTTP response (transport error, timeout, mock failure).
class ProviderError : public Error {
public:
    ProviderError(std::string stage, const std::string& message,
                  int http_status = 0, bool timed_out = false)
        : Error(message),
          stage_(std::move(stage)),
          http_status_(http_status),
          timed_out_(timed_out) {}

    const std::string& stage() const { return stage_; }
    int http_status() const { return http_status_; }
    bool timed_out() const { return timed_out_; }

private:
    std::string stage_;
    int http_status_;
    bool timed_out_;
};

// Bad client-side input (WAV parsing, option validation).
class InputError : public Error {
public:
    using Error::Error;
};

} // namespace cui
