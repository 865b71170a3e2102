#include "cui/wire.hpp"

#include "cui/errors.hpp"

#include <cstdio>

namespace cui::wire {

bool is_known_type(std::uint8_t code) {
    return code >= 0x01 && code <= 0x0B;
}

bool is_client_to_server(MessageType type) {
    switch (type) {
    case MessageType::session_config:
    case MessageType::audio_in_chunk:
    case MessageType::audio_in_end:
    case MessageType::reset_history:
    case MessageType::text_in:
        return true;
    default:
        return false;
    }
}

std::string_view type_name(MessageType type) {
    switch (type) {
    case MessageType::session_config:  return "SESSION_CONFIG";
    case MessageType::config_ack:      return "CONFIG_ACK";
    case MessageType::audio_in_chunk:  return "AUDIO_IN_CHUNK";
    case MessageType::audio_in_end:    return "AUDIO_IN_END";
    case MessageType::transcript:      return "TRANSCRIPT";
    case MessageType::response_text:   return "RESPONSE_TEXT";
    case MessageType::audio_out_chunk: return "AUDIO_OUT_CHUNK";
    case MessageType::audio_out_end:   return "AUDIO_OUT_END";
    case MessageType::error:           return "ERROR";
    case MessageType::reset_history:   return "RESET_HISTORY";
    case MessageType::text_in:         return "TEXT_IN";
    }
    return "UNKNOWN";
}

std::vector<std::uint8_t> encode_frame(MessageType type,
                                       std::span<const std::uint8_t> payload) {
    if (payload.size() > 0xFFFFFFFFull) {
        throw ProtocolError(ProtocolError::Kind::oversize,
                            "payload too large to encode");
    }
    const auto len = static_cast<std::uint32_t>(payload.size());
    std::vector<std::uint8_t> out;
    out.reserve(kHeaderSize + payload.size());
    out.push_back(static_cast<std::uint8_t>((len >> 24) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((len >> 16) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((len >> 8) & 0xFF));
    out.push_back(static_cast<std::uint8_t>(len & 0xFF));
    out.push_back(static_cast<std::uint8_t>(type));
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

std::vector<std::uint8_t> encode_frame(MessageType type, std::string_view payload) {
    return encode_frame(
        type, std::span(reinterpret_cast<const std::uint8_t*>(payload.data()),
                        payload.size()));
}

std::vector<Frame> FrameDecoder::feed(std::span<const std::uint8_t> bytes) {
    if (poisoned_) {
        throw ProtocolError(ProtocolError::Kind::poisoned,
                            "decoder poisoned by a previous protocol error");
    }
    buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());

    std::vector<Frame> frames;
    std::size_t pos = 0;
    while (buffer_.size() - pos >= kHeaderSize) {
        const std::uint32_t len = (std::uint32_t{buffer_[pos]} << 24) |
                                  (std::uint32_t{buffer_[pos + 1]} << 16) |
                                  (std::uint32_t{buffer_[pos + 2]} << 8) |
                                  std::uint32_t{buffer_[pos + 3]};
        const std::uint8_t code = buffer_[pos + 4];
        if (!is_known_type(code)) {
            poisoned_ = true;
            char msg[48];
            std::snprintf(msg, sizeof msg, "unknown frame type 0x%02X", code);
            throw ProtocolError(ProtocolError::Kind::unknown_type, msg);
        }
        if (len > limit_) {
            poisoned_ = true;
            throw ProtocolError(ProtocolError::Kind::oversize,
                                "declared payload length " + std::to_string(len) +
                                    " exceeds limit " + std::to_string(limit_));
        }
        if (buffer_.size() - pos - kHeaderSize < len) {
            break; // partial frame, wait for more bytes
        }
        Frame frame;
        frame.type = static_cast<MessageType>(code);
        frame.payload.assign(buffer_.begin() + static_cast<std::ptrdiff_t>(pos + kHeaderSize),
                             buffer_.begin() + static_cast<std::ptrdiff_t>(pos + kHeaderSize + len));
        frames.push_back(std::move(frame));
        pos += kHeaderSize + len;
    }
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(pos));
    return frames;
}

std::vector<Frame> FrameDecoder::feed(std::string_view bytes) {
    return feed(std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()),
                          bytes.size()));
}

} // namespace cui::wire
