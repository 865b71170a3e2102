#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>

namespace cui::net {

// Thrown when a connect() fails outright (distinct so the CLI can map it to
// its own exit code).
struct ConnectRefused {
    std::string message;
};

// RAII file descriptor.
class Socket {
public:
    Socket() = default;
    explicit Socket(int fd) : fd_(fd) {}
    Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
    Socket& operator=(Socket&& other) noexcept;
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;
    ~Socket();

    int fd() const { return fd_; }
    bool valid() const { return fd_ >= 0; }
    void close();

    // Unblocks any thread sitting in recv/send on this socket.
    void shutdown_both() const;

private:
    int fd_ = -1;
};

// "host:port" -> parts; throws ConfigError on missing/invalid port.
std::pair<std::string, std::uint16_t> parse_hostport(const std::string& text);

// True for addresses that only loopback traffic can reach.
bool is_loopback_address(const std::string& host);

// All throw cui::Error on failure, except tcp_connect which throws
// ConnectRefused when the peer is unreachable.
Socket tcp_listen(const std::string& host, std::uint16_t port, int backlog);
std::optional<Socket> tcp_accept(const Socket& listener);
Socket tcp_connect(const std::string& host, std::uint16_t port);

std::uint16_t local_port(const Socket& sock);

// Milliseconds a blocked recv() waits before returning EAGAIN; lets read
// loops poll a stop flag.
void set_recv_timeout(const Socket& sock, int ms);

bool send_all(const Socket& sock, std::span<const std::uint8_t> bytes);

// >0 bytes read, 0 on orderly EOF, -1 on error, -2 on timeout.
int recv_some(const Socket& sock, std::uint8_t* buffer, std::size_t size);

} // namespace cui::net
