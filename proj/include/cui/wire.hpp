#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cui::wire {

// One-byte frame type codes. Direction is part of the contract: the server
// rejects server-to-client codes arriving on its inbound side.
enum class MessageType : std::uint8_t {
    session_config  = 0x01, // client -> server, UTF-8 JSON session config
    config_ack      = 0x02, // server -> client, JSON {status, session_id}
    audio_in_chunk  = 0x03, // client -> server, raw audio bytes
    audio_in_end    = 0x04, // client -> server, empty payload
    transcript      = 0x05, // server -> client, UTF-8 text
    response_text   = 0x06, // server -> client, UTF-8 sentence text
    audio_out_chunk = 0x07, // server -> client, raw audio bytes
    audio_out_end   = 0x08, // server -> client, empty payload
    error           = 0x09, // server -> client, JSON {code, message}
    reset_history   = 0x0A, // client -> server, empty payload
    text_in         = 0x0B, // client -> server, UTF-8 text (bypasses STT)
};

bool is_known_type(std::uint8_t code);
bool is_client_to_server(MessageType type);
std::string_view type_name(MessageType type);

struct Frame {
    MessageType type;
    std::vector<std::uint8_t> payload;

    std::string_view payload_text() const {
        return {reinterpret_cast<const char*>(payload.data()), payload.size()};
    }

    bool operator==(const Frame&) const = default;
};

// 4-byte big-endian payload length + 1-byte type.
inline constexpr std::size_t kHeaderSize = 5;
inline constexpr std::size_t kDefaultPayloadLimit = 16u * 1024 * 1024;

// Encodes one frame: length (big-endian u32), type byte, payload.
// Throws ProtocolError on payloads >= 2^32 bytes.
std::vector<std::uint8_t> encode_frame(MessageType type,
                                       std::span<const std::uint8_t> payload);
std::vector<std::uint8_t> encode_frame(MessageType type, std::string_view payload);

// Incremental frame decoder. Feed arbitrary byte fragments; complete frames
// come back in order, a trailing partial frame is retained for the next
// call. Errors (unknown type, oversize declaration) poison the decoder: all
// further feeds throw. One decoder per connection; not thread-safe.
class FrameDecoder {
public:
    explicit FrameDecoder(std::size_t payload_limit = kDefaultPayloadLimit)
        : limit_(payload_limit) {}

    // Throws ProtocolError (unknown_type, oversize, or poisoned).
    std::vector<Frame> feed(std::span<const std::uint8_t> bytes);
    std::vector<Frame> feed(std::string_view bytes);

    std::size_t buffered() const { return buffer_.size(); }
    std::size_t payload_limit() const { return limit_; }
    bool poisoned() const { return poisoned_; }

private:
    std::vector<std::uint8_t> buffer_;
    std::size_t limit_;
    bool poisoned_ = false;
};

} // namespace cui::wire
