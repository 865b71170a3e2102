#include "cui/server.hpp"

#include "cui/config.hpp"
#include "cui/errors.hpp"

#include <json.hpp>

#include <cstdio>

namespace cui::server {

namespace {

using nlohmann::json;

constexpr int kRecvPollMs = 100;
constexpr std::size_t kReadBufferSize = 64 * 1024;

std::string_view error_code_for(ProtocolError::Kind kind) {
    switch (kind) {
    case ProtocolError::Kind::oversize: return error_code::payload_limit;
    case ProtocolError::Kind::unknown_type:
    case ProtocolError::Kind::poisoned:
    case ProtocolError::Kind::malformed:
        return error_code::phase_violation;
    }
    return error_code::internal;
}

} // namespace

std::string_view phase_name(Phase phase) {
    switch (phase) {
    case Phase::awaiting_config: return "awaiting_config";
    case Phase::idle: return "idle";
    case Phase::receiving_utterance: return "receiving_utterance";
    case Phase::responding: return "responding";
    case Phase::closed: return "closed";
    }
    return "unknown";
}

std::vector<std::uint8_t> encode_error_payload(std::string_view code,
                                               std::string_view message) {
    const std::string text = json{{"code", code}, {"message", message}}.dump();
    return {text.begin(), text.end()};
}

std::vector<wire::Frame> event_frames(const pipeline::OutputEvent& event) {
    using namespace pipeline;
    std::vector<wire::Frame> out;
    if (const auto* e = std::get_if<TranscriptEvent>(&event)) {
        out.push_back({wire::MessageType::transcript,
                       {e->text.begin(), e->text.end()}});
    } else if (const auto* e = std::get_if<SentenceTextEvent>(&event)) {
        out.push_back({wire::MessageType::response_text,
                       {e->text.begin(), e->text.end()}});
    } else if (const auto* e = std::get_if<SentenceAudioChunkEvent>(&event)) {
        out.push_back({wire::MessageType::audio_out_chunk, e->bytes});
    } else if (std::get_if<SentenceAudioEndEvent>(&event)) {
        // Sentence ends are implicit on the wire: the next RESPONSE_TEXT or
        // the final AUDIO_OUT_END delimits them.
    } else if (std::get_if<ResponseEndEvent>(&event)) {
        out.push_back({wire::MessageType::audio_out_end, {}});
    } else if (const auto* e = std::get_if<PipelineErrorEvent>(&event)) {
        out.push_back({wire::MessageType::error,
                       encode_error_payload(error_code::provider_failure,
                                            e->stage + ": " + e->reason)});
    }
    return out;
}

// Per-connection state. The reader thread owns phase transitions; the
// per-turn pipeline thread writes response frames (serialized through
// write_mutex) and signals completion via turn_done/response_ended.
struct GatewayServer::Connection {
    std::uint64_t id = 0;
    net::Socket sock;
    wire::FrameDecoder decoder;
    pipeline::UtteranceBuffer utterance;
    std::atomic<Phase> phase{Phase::awaiting_config};
    std::unique_ptr<session::Session> session;
    std::shared_ptr<std::atomic<bool>> cancel =
        std::make_shared<std::atomic<bool>>(false);

    std::mutex write_mutex;
    bool writes_closed = false; // set once a fatal ERROR frame went out

    std::thread pipeline_thread;
    // The turn's terminal frame (AUDIO_OUT_END or a provider ERROR) has been
    // written; anything the client sends from here on is a new turn, not a
    // barge-in.
    std::atomic<bool> response_ended{false};
    std::atomic<bool> turn_done{false};

    std::thread reader;
    std::atomic<bool> finished{false};

    Connection(std::size_t frame_limit, std::size_t utterance_limit)
        : decoder(frame_limit), utterance(utterance_limit) {}
};

GatewayServer::GatewayServer(
    ServerConfig config,
    std::shared_ptr<const providers::ProviderRegistry> registry)
    : config_(std::move(config)),
      registry_(std::move(registry)),
      log_(config_.log_path) {}

GatewayServer::~GatewayServer() { stop(); }

void GatewayServer::start() {
    if (!config_.allow_remote && !net::is_loopback_address(config_.bind_host)) {
        throw ConfigError("refusing to bind non-loopback address " +
                          config_.bind_host +
                          " without explicit remote access opt-in");
    }
    listener_ = net::tcp_listen(config_.bind_host, config_.bind_port, 64);
    port_ = net::local_port(listener_);
    started_ = true;
    acceptor_ = std::thread([this] { accept_loop(); });
}

void GatewayServer::stop() {
    if (!started_.exchange(false)) return;
    stop_deadline_ = std::chrono::steady_clock::now() +
                     std::chrono::milliseconds(config_.shutdown_grace_ms);
    stopping_ = true;
    listener_.shutdown_both();
    listener_.close();
    if (acceptor_.joinable()) acceptor_.join();

    std::list<std::unique_ptr<Connection>> conns;
    {
        std::lock_guard lock(conns_mutex_);
        conns.swap(conns_);
    }
    for (auto& conn : conns) {
        if (conn->reader.joinable()) conn->reader.join();
    }
}

void GatewayServer::accept_loop() {
    while (true) {
        auto sock = net::tcp_accept(listener_);
        if (!sock) break; // listener closed
        reap_finished();

        if (active_.load() >= config_.max_connections) {
            net::send_all(*sock,
                          wire::encode_frame(
                              wire::MessageType::error,
                              encode_error_payload(error_code::server_full,
                                                   "server full")));
            continue; // refused socket closes as it goes out of scope
        }

        auto conn = std::make_unique<Connection>(config_.frame_limit,
                                                 config_.utterance_limit);
        conn->id = next_conn_id_.fetch_add(1);
        conn->sock = std::move(*sock);
        net::set_recv_timeout(conn->sock, kRecvPollMs);
        active_.fetch_add(1);

        Connection* raw = conn.get();
        raw->reader = std::thread([this, raw] {
            connection_loop(*raw);
            active_.fetch_sub(1);
            raw->finished = true;
        });
        std::lock_guard lock(conns_mutex_);
        conns_.push_back(std::move(conn));
    }
}

void GatewayServer::reap_finished() {
    std::lock_guard lock(conns_mutex_);
    for (auto it = conns_.begin(); it != conns_.end();) {
        if ((*it)->finished.load() && (*it)->reader.joinable()) {
            (*it)->reader.join();
            it = conns_.erase(it);
        } else {
            ++it;
        }
    }
}

void GatewayServer::connection_loop(Connection& conn) {
    log_verbose(conn, "connected");
    std::vector<std::uint8_t> buffer(kReadBufferSize);
    bool open = true;
    while (open) {
        if (stopping_.load()) {
            // Mid-response means the terminal frame is still pending; those
            // connections get the grace period, everyone else closes now.
            const bool mid_response =
                conn.phase.load() == Phase::responding &&
                !conn.response_ended.load();
            if (!mid_response ||
                std::chrono::steady_clock::now() >= stop_deadline_) {
                break;
            }
        }
        const int n = net::recv_some(conn.sock, buffer.data(), buffer.size());
        if (n == -2) continue; // poll tick; recheck the stop flag
        if (n <= 0) break;     // disconnect or socket error

        std::vector<wire::Frame> frames;
        try {
            frames = conn.decoder.feed(std::span<const std::uint8_t>(
                buffer.data(), static_cast<std::size_t>(n)));
        } catch (const ProtocolError& e) {
            fail_connection(conn, error_code_for(e.kind()), e.what());
            break;
        }
        for (const auto& frame : frames) {
            if (!handle_frame(conn, frame)) {
                open = false;
                break;
            }
        }
    }
    // Reader gone: abandon whatever the pipeline is still doing. A turn cut
    // off here is committed as aborted by the pipeline itself.
    conn.cancel->store(true);
    if (conn.pipeline_thread.joinable()) conn.pipeline_thread.join();
    conn.phase.store(Phase::closed);
    conn.sock.close();
    log_verbose(conn, "closed");
}

// Returns false when the connection is done for.
bool GatewayServer::handle_frame(Connection& conn, const wire::Frame& frame) {
    using wire::MessageType;
    log_verbose(conn, "recv " + std::string(wire::type_name(frame.type)) +
                          " (" + std::to_string(frame.payload.size()) +
                          " bytes)");

    // A frame arriving after the turn's terminal frame went out is the next
    // turn; reclaim the pipeline thread and fall through to normal handling.
    if (conn.phase.load() == Phase::responding && conn.response_ended.load()) {
        finish_turn(conn);
    }

    if (!wire::is_client_to_server(frame.type)) {
        fail_connection(conn, error_code::phase_violation,
                        std::string(wire::type_name(frame.type)) +
                            " is a server-to-client message");
        return false;
    }

    switch (conn.phase.load()) {
    case Phase::awaiting_config:
        if (frame.type != MessageType::session_config) {
            fail_connection(conn, error_code::phase_violation,
                            "SESSION_CONFIG must be the first message");
            return false;
        }
        try {
            auto parsed = session::parse_session_config(frame.payload_text(),
                                                        *registry_);
            conn.session = std::make_unique<session::Session>(
                std::move(parsed), *registry_);
        } catch (const ConfigError& e) {
            fail_connection(conn, error_code::cfg_invalid, e.what());
            return false;
        }
        {
            const std::string ack =
                json{{"status", "ok"}, {"session_id", conn.session->id()}}
                    .dump();
            write_frame(conn, {MessageType::config_ack,
                               {ack.begin(), ack.end()}});
        }
        conn.phase.store(Phase::idle);
        log_verbose(conn, "session " + conn.session->id() + " configured");
        return true;

    case Phase::idle:
        switch (frame.type) {
        case MessageType::session_config:
            fail_connection(conn, error_code::cfg_duplicate,
                            "session is already configured");
            return false;
        case MessageType::audio_in_chunk:
            conn.utterance.reset();
            conn.phase.store(Phase::receiving_utterance);
            return append_chunk(conn, frame);
        case MessageType::audio_in_end:
            fail_connection(conn, error_code::phase_violation,
                            "no utterance in progress");
            return false;
        case MessageType::text_in:
            start_turn(conn,
                       pipeline::RunInput{
                           .utterance = nullptr,
                           .direct_text = std::string(frame.payload_text())});
            return true;
        case MessageType::reset_history:
            conn.session->reset_history();
            log_verbose(conn, "history cleared");
            return true;
        default:
            fail_connection(conn, error_code::phase_violation,
                            std::string(wire::type_name(frame.type)) +
                                " is not valid while idle");
            return false;
        }

    case Phase::receiving_utterance:
        switch (frame.type) {
        case MessageType::session_config:
            fail_connection(conn, error_code::cfg_duplicate,
                            "session is already configured");
            return false;
        case MessageType::audio_in_chunk:
            return append_chunk(conn, frame);
        case MessageType::audio_in_end:
            conn.utterance.close();
            start_turn(conn,
                       pipeline::RunInput{.utterance = &conn.utterance,
                                          .direct_text = std::nullopt});
            return true;
        default:
            fail_connection(conn, error_code::phase_violation,
                            std::string(wire::type_name(frame.type)) +
                                " is not valid mid-utterance");
            return false;
        }

    case Phase::responding:
        if (frame.type == MessageType::session_config) {
            fail_connection(conn, error_code::cfg_duplicate,
                            "session is already configured");
            return false;
        }
        fail_connection(conn, error_code::phase_violation,
                        "barge-in unsupported: a response is in progress");
        return false;

    case Phase::closed:
        return false;
    }
    return false;
}

bool GatewayServer::append_chunk(Connection& conn, const wire::Frame& frame) {
    try {
        conn.utterance.append(frame.payload);
        return true;
    } catch (const ProtocolError& e) {
        fail_connection(conn, error_code::payload_limit, e.what());
        return false;
    }
}

void GatewayServer::start_turn(Connection& conn, pipeline::RunInput input) {
    if (conn.pipeline_thread.joinable()) conn.pipeline_thread.join();
    conn.phase.store(Phase::responding);
    conn.cancel->store(false);
    conn.response_ended = false;
    conn.turn_done = false;

    Connection* raw = &conn;
    conn.pipeline_thread = std::thread([this, raw, input = std::move(input)] {
        const pipeline::EventSink sink =
            [this, raw](const pipeline::OutputEvent& ev) {
                // Publish end-of-response before the terminal frame can
                // reach the client: a frame it sends in reaction must find
                // the flag already set, or it would read as barge-in.
                if (std::holds_alternative<pipeline::ResponseEndEvent>(ev) ||
                    std::holds_alternative<pipeline::PipelineErrorEvent>(ev)) {
                    raw->response_ended = true;
                }
                for (const auto& frame : event_frames(ev)) {
                    if (!write_frame(*raw, frame)) {
                        raw->cancel->store(true);
                        return;
                    }
                }
            };
        try {
            const auto record = pipeline::run_turn(*raw->session, input, sink,
                                                   {.cancel = raw->cancel});
            if (record) {
                log_.write(*record, raw->session->secret_values());
                log_verbose(*raw,
                            "turn " + std::to_string(record->turn_index) +
                                (record->aborted ? " aborted" : " committed"));
            }
        } catch (const std::exception& e) {
            fail_connection(*raw, error_code::internal, e.what());
        }
        raw->response_ended = true;
        raw->turn_done = true;
    });
}

// Joins a finished turn's thread and returns the connection to idle. Only
// called once the terminal frame is out, so the wait below is bounded by
// the pipeline's epilogue (commit + log write).
void GatewayServer::finish_turn(Connection& conn) {
    while (!conn.turn_done.load()) {
        std::this_thread::sleep_for(std::chrono::microseconds(200));
    }
    if (conn.pipeline_thread.joinable()) conn.pipeline_thread.join();
    Phase expected = Phase::responding;
    conn.phase.compare_exchange_strong(expected, Phase::idle);
}

bool GatewayServer::write_frame(Connection& conn, const wire::Frame& frame) {
    std::lock_guard lock(conn.write_mutex);
    if (conn.writes_closed) return false;
    return net::send_all(conn.sock,
                         wire::encode_frame(frame.type, frame.payload));
}

// Sends the final ERROR frame and guarantees nothing follows it on the wire.
void GatewayServer::fail_connection(Connection& conn, std::string_view code,
                                    std::string_view message) {
    conn.cancel->store(true);
    {
        std::lock_guard lock(conn.write_mutex);
        if (!conn.writes_closed) {
            net::send_all(conn.sock, wire::encode_frame(
                                         wire::MessageType::error,
                                         encode_error_payload(code, message)));
            conn.writes_closed = true;
        }
    }
    conn.phase.store(Phase::closed);
    log_verbose(conn,
                "error " + std::string(code) + ": " + std::string(message));
}

void GatewayServer::log_verbose(const Connection& conn,
                                const std::string& line) const {
    if (!config_.verbose) return;
    std::fprintf(stderr, "[conn %llu] %s\n",
                 static_cast<unsigned long long>(conn.id), line.c_str());
}

} // namespace cui::server
