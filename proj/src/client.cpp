#include "cui/client.hpp"

namespace cui::client {

namespace {

using nlohmann::json;

ErrorReply parse_error(std::string_view payload) {
    const json doc = json::parse(payload, nullptr, false);
    if (doc.is_object() && doc.contains("code") && doc["code"].is_string()) {
        return {doc["code"].get<std::string>(), doc.value("message", "")};
    }
    return {"UNKNOWN", std::string(payload)};
}

double ms_since(std::chrono::steady_clock::time_point from) {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - from)
        .count();
}

} // namespace

std::string TurnReport::joined_text() const {
    std::string out;
    for (const auto& s : sentences) {
        if (!out.empty()) out += ' ';
        out += s.text;
    }
    return out;
}

GatewayConnection::GatewayConnection(const std::string& host,
                                     std::uint16_t port)
    : sock_(net::tcp_connect(host, port)) {
    net::set_recv_timeout(sock_, 50);
}

void GatewayConnection::set_response_timeout(
    std::chrono::milliseconds timeout) {
    response_timeout_ = timeout;
}

void GatewayConnection::close() { sock_.close(); }

bool GatewayConnection::send(wire::MessageType type,
                             std::span<const std::uint8_t> payload) {
    return net::send_all(sock_, wire::encode_frame(type, payload));
}

std::optional<wire::Frame>
GatewayConnection::next_frame(std::chrono::steady_clock::time_point deadline) {
    std::uint8_t buffer[16 * 1024];
    while (true) {
        if (!pending_.empty()) {
            wire::Frame frame = std::move(pending_.front());
            pending_.pop_front();
            return frame;
        }
        if (std::chrono::steady_clock::now() >= deadline) return std::nullopt;
        const int n = net::recv_some(sock_, buffer, sizeof(buffer));
        if (n == -2) continue;            // poll tick
        if (n <= 0) return std::nullopt;  // server closed
        for (auto& frame :
             decoder_.feed(std::span<const std::uint8_t>(
                 buffer, static_cast<std::size_t>(n)))) {
            pending_.push_back(std::move(frame));
        }
    }
}

HandshakeResult GatewayConnection::handshake(const json& session_config) {
    const std::string payload = session_config.dump();
    if (!send(wire::MessageType::session_config,
              {reinterpret_cast<const std::uint8_t*>(payload.data()),
               payload.size()})) {
        return {"", ErrorReply{"UNKNOWN", "send failed"}};
    }
    const auto deadline =
        std::chrono::steady_clock::now() + std::chrono::seconds(10);
    const auto frame = next_frame(deadline);
    if (!frame) {
        return {"", ErrorReply{"UNKNOWN", "no reply to session config"}};
    }
    if (frame->type == wire::MessageType::error) {
        return {"", parse_error(frame->payload_text())};
    }
    if (frame->type != wire::MessageType::config_ack) {
        return {"", ErrorReply{"UNKNOWN", "unexpected reply frame"}};
    }
    const json ack = json::parse(frame->payload_text(), nullptr, false);
    if (!ack.is_object() || ack.value("status", "") != "ok") {
        return {"", ErrorReply{"UNKNOWN", "malformed CONFIG_ACK"}};
    }
    return {ack.value("session_id", ""), std::nullopt};
}

TurnReport
GatewayConnection::collect_response(std::chrono::steady_clock::time_point t0) {
    TurnReport report;
    const auto deadline = std::chrono::steady_clock::now() + response_timeout_;
    while (auto frame = next_frame(deadline)) {
        switch (frame->type) {
        case wire::MessageType::transcript:
            report.transcript = frame->payload_text();
            break;
        case wire::MessageType::response_text:
            report.sentences.push_back(
                {static_cast<int>(report.sentences.size()),
                 std::string(frame->payload_text()),
                 {}});
            break;
        case wire::MessageType::audio_out_chunk:
            if (!report.ttfa_ms) report.ttfa_ms = ms_since(t0);
            if (report.sentences.empty()) {
                report.sentences.push_back({0, "", {}});
            }
            report.sentences.back().audio.insert(
                report.sentences.back().audio.end(), frame->payload.begin(),
                frame->payload.end());
            break;
        case wire::MessageType::audio_out_end:
            report.total_ms = ms_since(t0);
            report.completed = true;
            return report;
        case wire::MessageType::error:
            report.error = parse_error(frame->payload_text());
            return report;
        default:
            break; // nothing else is expected mid-turn; skip it
        }
    }
    return report; // timeout or connection loss
}

TurnReport GatewayConnection::text_turn(const std::string& text) {
    send(wire::MessageType::text_in,
         {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
    return collect_response(std::chrono::steady_clock::now());
}

TurnReport GatewayConnection::audio_turn(std::span<const std::uint8_t> pcm,
                                         std::size_t chunk_bytes) {
    if (pcm.empty()) {
        send(wire::MessageType::audio_in_chunk, {});
    }
    for (std::size_t off = 0; off < pcm.size(); off += chunk_bytes) {
        const std::size_t len = std::min(chunk_bytes, pcm.size() - off);
        if (!send(wire::MessageType::audio_in_chunk,
                  pcm.subspan(off, len))) {
            break;
        }
    }
    send(wire::MessageType::audio_in_end, {});
    return collect_response(std::chrono::steady_clock::now());
}

bool GatewayConnection::reset_history() {
    return send(wire::MessageType::reset_history, {});
}

} // namespace cui::client
