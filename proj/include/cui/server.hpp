#pragma once

#include "cui/detail/net.hpp"
#include "cui/pipeline.hpp"
#include "cui/registry.hpp"
#include "cui/session.hpp"
#include "cui/wire.hpp"

#include <atomic>
#include <chrono>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace cui::server {

struct ServerConfig {
    std::string bind_host = "127.0.0.1";
    std::uint16_t bind_port = 7061;
    int max_connections = 64;
    std::string log_path; // empty disables the turn log
    std::size_t frame_limit = wire::kDefaultPayloadLimit;
    std::size_t utterance_limit = pipeline::UtteranceBuffer::kDefaultMaxBytes;
    int shutdown_grace_ms = 3000;
    bool allow_remote = false;
    bool verbose = false;
};

// Connection lifecycle. A connection speaks exactly one session; protocol
// violations close it after a single ERROR frame.
enum class Phase {
    awaiting_config,
    idle,
    receiving_utterance,
    responding,
    closed,
};

std::string_view phase_name(Phase phase);

// Machine-readable `code` values carried by ERROR frames.
namespace error_code {
inline constexpr std::string_view cfg_invalid = "CFG_INVALID";
inline constexpr std::string_view cfg_duplicate = "CFG_DUPLICATE";
inline constexpr std::string_view phase_violation = "PHASE_VIOLATION";
inline constexpr std::string_view payload_limit = "PAYLOAD_LIMIT";
inline constexpr std::string_view provider_failure = "PROVIDER_FAILURE";
inline constexpr std::string_view server_full = "SERVER_FULL";
inline constexpr std::string_view internal = "INTERNAL";
} // namespace error_code

std::vector<std::uint8_t> encode_error_payload(std::string_view code,
                                               std::string_view message);

// How one pipeline event leaves the server: zero or more frames, in order.
std::vector<wire::Frame> event_frames(const pipeline::OutputEvent& event);

// Thread-per-connection gateway. Each accepted socket gets a reader thread;
// each turn runs on a short-lived pipeline thread so the reader keeps
// watching for barge-in and disconnects while a response streams out.
class GatewayServer {
public:
    GatewayServer(ServerConfig config,
                  std::shared_ptr<const providers::ProviderRegistry> registry);
    ~GatewayServer();

    // Binds and starts accepting; throws on bind failure or when the bind
    // address is non-loopback without allow_remote.
    void start();

    // Stops accepting, lets in-flight responses finish within the grace
    // period, then forces the rest closed. Idempotent.
    void stop();

    std::uint16_t port() const { return port_; }
    int active_connections() const { return active_.load(); }

private:
    struct Connection;

    void accept_loop();
    void connection_loop(Connection& conn);
    bool handle_frame(Connection& conn, const wire::Frame& frame);
    bool append_chunk(Connection& conn, const wire::Frame& frame);
    void start_turn(Connection& conn, pipeline::RunInput input);
    void finish_turn(Connection& conn);
    bool write_frame(Connection& conn, const wire::Frame& frame);
    void fail_connection(Connection& conn, std::string_view code,
                         std::string_view message);
    void reap_finished();
    void log_verbose(const Connection& conn, const std::string& line) const;

    ServerConfig config_;
    std::shared_ptr<const providers::ProviderRegistry> registry_;
    session::TurnLog log_;
    net::Socket listener_;
    std::uint16_t port_ = 0;
    std::thread acceptor_;
    std::atomic<bool> stopping_{false};
    std::atomic<bool> started_{false};
    std::chrono::steady_clock::time_point stop_deadline_{};
    std::atomic<int> active_{0};
    std::atomic<std::uint64_t> next_conn_id_{1};

    std::mutex conns_mutex_;
    std::list<std::unique_ptr<Connection>> conns_;
};

} // namespace cui::server
