#pragma once

#include "cui/detail/net.hpp"
#include "cui/wire.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cui::client {

// One spoken sentence of a reply: its text and the PCM synthesized for it.
struct Sentence {
    int index = 0;
    std::string text;
    std::vector<std::uint8_t> audio;
};

struct ErrorReply {
    std::string code;
    std::string message;
};

struct HandshakeResult {
    std::string session_id;            // set on success
    std::optional<ErrorReply> error;   // set on rejection
    bool ok() const { return !error.has_value(); }
};

// Everything one turn produced, in arrival order, with client-side timing
// measured from the moment the input finished sending.
struct TurnReport {
    std::string transcript;
    std::vector<Sentence> sentences;
    std::optional<double> ttfa_ms;   // first audio chunk
    std::optional<double> total_ms;  // AUDIO_OUT_END
    std::optional<ErrorReply> error; // server ERROR frame, if one arrived
    bool completed = false;          // saw AUDIO_OUT_END

    std::string joined_text() const;
};

// Blocking reference client for the gateway protocol: one connection, one
// configured session, turns run strictly one at a time.
class GatewayConnection {
public:
    // Throws net::ConnectRefused when nothing is listening.
    GatewayConnection(const std::string& host, std::uint16_t port);

    HandshakeResult handshake(const nlohmann::json& session_config);

    TurnReport text_turn(const std::string& text);
    TurnReport audio_turn(std::span<const std::uint8_t> pcm,
                          std::size_t chunk_bytes = 3200);

    // Fire-and-forget; the server sends no acknowledgement.
    bool reset_history();

    // How long to wait for the response to finish before giving up.
    void set_response_timeout(std::chrono::milliseconds timeout);

    void close();

private:
    bool send(wire::MessageType type, std::span<const std::uint8_t> payload);
    std::optional<wire::Frame>
    next_frame(std::chrono::steady_clock::time_point deadline);
    TurnReport collect_response(std::chrono::steady_clock::time_point sent_at);

    net::Socket sock_;
    wire::FrameDecoder decoder_;
    std::deque<wire::Frame> pending_;
    std::chrono::milliseconds response_timeout_{120000};
};

} // namespace cui::client
