#include "cui/detail/net.hpp"

#include "cui/errors.hpp"

#include <arpa/inet.h>
#include <cerrno>
#include <cstring>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

namespace cui::net {

namespace {

[[noreturn]] void throw_errno(const std::string& what) {
    throw Error(what + ": " + std::strerror(errno));
}

struct AddrInfo {
    addrinfo* list = nullptr;
    ~AddrInfo() {
        if (list) freeaddrinfo(list);
    }
};

AddrInfo resolve(const std::string& host, std::uint16_t port, bool passive) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = passive ? AI_PASSIVE : 0;
    AddrInfo out;
    const int rc = getaddrinfo(host.c_str(), std::to_string(port).c_str(),
                               &hints, &out.list);
    if (rc != 0) {
        throw Error("cannot resolve '" + host + "': " + gai_strerror(rc));
    }
    return out;
}

} // namespace

Socket& Socket::operator=(Socket&& other) noexcept {
    if (this != &other) {
        close();
        fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
}

Socket::~Socket() { close(); }

void Socket::close() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

void Socket::shutdown_both() const {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

std::pair<std::string, std::uint16_t> parse_hostport(const std::string& text) {
    const auto colon = text.rfind(':');
    if (colon == std::string::npos || colon == 0 ||
        colon + 1 == text.size()) {
        throw ConfigError("expected HOST:PORT, got '" + text + "'");
    }
    const std::string host = text.substr(0, colon);
    const std::string port_text = text.substr(colon + 1);
    int port = 0;
    for (const char c : port_text) {
        if (c < '0' || c > '9') {
            throw ConfigError("invalid port '" + port_text + "'");
        }
        port = port * 10 + (c - '0');
        if (port > 65535) {
            throw ConfigError("port out of range '" + port_text + "'");
        }
    }
    return {host, static_cast<std::uint16_t>(port)};
}

bool is_loopback_address(const std::string& host) {
    if (host == "localhost" || host == "::1") return true;
    in_addr v4{};
    if (inet_pton(AF_INET, host.c_str(), &v4) == 1) {
        return (ntohl(v4.s_addr) >> 24) == 127;
    }
    return false;
}

Socket tcp_listen(const std::string& host, std::uint16_t port, int backlog) {
    const auto addrs = resolve(host, port, true);
    for (const addrinfo* ai = addrs.list; ai; ai = ai->ai_next) {
        Socket sock(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
        if (!sock.valid()) continue;
        const int one = 1;
        setsockopt(sock.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
        if (::bind(sock.fd(), ai->ai_addr, ai->ai_addrlen) != 0) continue;
        if (::listen(sock.fd(), backlog) != 0) continue;
        return sock;
    }
    throw_errno("cannot listen on " + host + ":" + std::to_string(port));
}

std::optional<Socket> tcp_accept(const Socket& listener) {
    while (true) {
        const int fd = ::accept(listener.fd(), nullptr, nullptr);
        if (fd >= 0) {
            const int one = 1;
            setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
            return Socket(fd);
        }
        if (errno == EINTR) continue;
        return std::nullopt; // listener closed or fatal accept failure
    }
}

Socket tcp_connect(const std::string& host, std::uint16_t port) {
    const auto addrs = resolve(host, port, false);
    int last_errno = ECONNREFUSED;
    for (const addrinfo* ai = addrs.list; ai; ai = ai->ai_next) {
        Socket sock(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
        if (!sock.valid()) continue;
        if (::connect(sock.fd(), ai->ai_addr, ai->ai_addrlen) == 0) {
            const int one = 1;
            setsockopt(sock.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
            return sock;
        }
        last_errno = errno;
    }
    throw ConnectRefused{"cannot connect to " + host + ":" +
                         std::to_string(port) + ": " +
                         std::strerror(last_errno)};
}

std::uint16_t local_port(const Socket& sock) {
    sockaddr_storage addr{};
    socklen_t len = sizeof(addr);
    if (getsockname(sock.fd(), reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
        throw_errno("getsockname");
    }
    if (addr.ss_family == AF_INET) {
        return ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
    }
    return ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port);
}

void set_recv_timeout(const Socket& sock, int ms) {
    timeval tv{};
    tv.tv_sec = ms / 1000;
    tv.tv_usec = (ms % 1000) * 1000;
    setsockopt(sock.fd(), SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
}

bool send_all(const Socket& sock, std::span<const std::uint8_t> bytes) {
    std::size_t sent = 0;
    while (sent < bytes.size()) {
        const ssize_t n = ::send(sock.fd(), bytes.data() + sent,
                                 bytes.size() - sent, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        sent += static_cast<std::size_t>(n);
    }
    return true;
}

int recv_some(const Socket& sock, std::uint8_t* buffer, std::size_t size) {
    while (true) {
        const ssize_t n = ::recv(sock.fd(), buffer, size, 0);
        if (n >= 0) return static_cast<int>(n);
        if (errno == EINTR) continue;
        if (errno == EAGAIN || errno == EWOULDBLOCK) return -2;
        return -1;
    }
}

} // namespace cui::net
