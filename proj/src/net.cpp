/*
 * Copyright (c) the smoker authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "smoker/net.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace smoker::net {

namespace {

using Kind = TransportError::Kind;

[[noreturn]] void fail_errno(Kind kind, const std::string& what) {
    throw TransportError(kind, what + ": " + std::strerror(errno));
}

void set_nonblocking(int fd, bool on) {
    int flags = ::fcntl(fd, F_GETFL, 0);
    if (flags < 0) fail_errno(Kind::Failed, "fcntl");
    if (on)
        flags |= O_NONBLOCK;
    else
        flags &= ~O_NONBLOCK;
    if (::fcntl(fd, F_SETFL, flags) < 0) fail_errno(Kind::Failed, "fcntl");
}

}  // namespace

Socket& Socket::operator=(Socket&& other) noexcept {
    if (this != &other) {
        close();
        fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
}

Socket Socket::connect(const std::string& host, std::uint16_t port,
                       std::chrono::milliseconds timeout) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* results = nullptr;
    const std::string port_str = std::to_string(port);
    if (::getaddrinfo(host.c_str(), port_str.c_str(), &hints, &results) != 0)
        throw TransportError(Kind::Failed, "cannot resolve " + host);

    TransportError last(Kind::Failed, "no addresses for " + host);
    for (addrinfo* ai = results; ai != nullptr; ai = ai->ai_next) {
        int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        Socket sock(fd);
        set_nonblocking(fd, true);
        int rc = ::connect(fd, ai->ai_addr, ai->ai_addrlen);
        if (rc < 0 && errno == EINPROGRESS) {
            pollfd pfd{fd, POLLOUT, 0};
            rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
            if (rc == 0) {
                last = TransportError(Kind::Timeout, "connect to " + host + " timed out");
                continue;
            }
            int err = 0;
            socklen_t len = sizeof(err);
            ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
            if (err != 0) {
                last = TransportError(Kind::Failed,
                                      "connect to " + host + ": " + std::strerror(err));
                continue;
            }
        } else if (rc < 0) {
            last = TransportError(Kind::Failed, "connect to " + host + ": " +
                                                    std::strerror(errno));
            continue;
        }
        set_nonblocking(fd, false);
        int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
        ::freeaddrinfo(results);
        return sock;
    }
    ::freeaddrinfo(results);
    throw last;
}

void Socket::send_all(ByteView data) {
    std::size_t sent = 0;
    while (sent < data.size()) {
        ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            if (errno == EPIPE || errno == ECONNRESET)
                fail_errno(Kind::Closed, "send on closed connection");
            fail_errno(Kind::Failed, "send");
        }
        sent += static_cast<std::size_t>(n);
    }
}

std::size_t Socket::recv_some(std::uint8_t* buf, std::size_t cap,
                              std::optional<std::chrono::milliseconds> timeout) {
    if (timeout) {
        pollfd pfd{fd_, POLLIN, 0};
        int rc;
        do {
            rc = ::poll(&pfd, 1, static_cast<int>(timeout->count()));
        } while (rc < 0 && errno == EINTR);
        if (rc < 0) fail_errno(Kind::Failed, "poll");
        if (rc == 0) throw TransportError(Kind::Timeout, "receive timed out");
    }
    for (;;) {
        ssize_t n = ::recv(fd_, buf, cap, 0);
        if (n < 0) {
            if (errno == EINTR) continue;
            if (errno == ECONNRESET) throw TransportError(Kind::Closed, "connection reset");
            fail_errno(Kind::Failed, "recv");
        }
        return static_cast<std::size_t>(n);
    }
}

void Socket::shutdown_both() noexcept {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void Socket::close() noexcept {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

Listener::Listener(const std::string& addr, std::uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) fail_errno(Kind::Failed, "socket");
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_port = htons(port);
    if (::inet_pton(AF_INET, addr.c_str(), &sa.sin_addr) != 1) {
        ::close(fd_);
        fd_ = -1;
        throw TransportError(Kind::Failed, "listen address must be an IPv4 literal: " + addr);
    }
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) < 0 ||
        ::listen(fd_, 64) < 0) {
        int saved = errno;
        ::close(fd_);
        fd_ = -1;
        throw TransportError(Kind::Failed,
                             "bind " + addr + ":" + std::to_string(port) + ": " +
                                 std::strerror(saved));
    }
    socklen_t len = sizeof(sa);
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&sa), &len);
    port_ = ntohs(sa.sin_port);

    if (::pipe(wake_pipe_) < 0) {
        ::close(fd_);
        fd_ = -1;
        fail_errno(Kind::Failed, "pipe");
    }
}

Listener::~Listener() {
    close();
    if (fd_ >= 0) ::close(fd_);
    if (wake_pipe_[0] >= 0) ::close(wake_pipe_[0]);
    if (wake_pipe_[1] >= 0) ::close(wake_pipe_[1]);
}

Socket Listener::accept() {
    for (;;) {
        pollfd pfds[2] = {{fd_, POLLIN, 0}, {wake_pipe_[0], POLLIN, 0}};
        int rc = ::poll(pfds, 2, -1);
        if (rc < 0) {
            if (errno == EINTR) continue;
            fail_errno(Kind::Failed, "poll");
        }
        if (pfds[1].revents) throw TransportError(Kind::Closed, "listener closed");
        if (!(pfds[0].revents & POLLIN)) continue;
        int fd = ::accept(fd_, nullptr, nullptr);
        if (fd < 0) {
            if (errno == EINTR || errno == ECONNABORTED) continue;
            fail_errno(Kind::Failed, "accept");
        }
        int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
        return Socket(fd);
    }
}

void Listener::close() noexcept {
    if (wake_pipe_[1] >= 0) {
        char byte = 1;
        [[maybe_unused]] ssize_t n = ::write(wake_pipe_[1], &byte, 1);
    }
}

std::pair<std::string, std::uint16_t> parse_host_port(const std::string& s,
                                                      std::uint16_t default_port) {
    auto colon = s.rfind(':');
    if (colon == std::string::npos) return {s, default_port};
    const std::string host = s.substr(0, colon);
    const std::string port_str = s.substr(colon + 1);
    int port = 0;
    for (char c : port_str) {
        if (c < '0' || c > '9') throw std::invalid_argument("bad port in address: " + s);
        port = port * 10 + (c - '0');
        if (port > 65535) throw std::invalid_argument("port out of range in address: " + s);
    }
    if (port_str.empty()) throw std::invalid_argument("empty port in address: " + s);
    return {host.empty() ? "127.0.0.1" : host, static_cast<std::uint16_t>(port)};
}

void PacketStream::send_raw(ByteView frame) {
    if (tap) tap(true, frame);
    sock_.send_all(frame);
}

std::optional<mqtt::Packet> PacketStream::recv(
    std::optional<std::chrono::milliseconds> timeout) {
    const auto started = std::chrono::steady_clock::now();
    for (;;) {
        auto frame_len = mqtt::peek_packet_length(ByteView(buf_.data(), buf_.size()));
        if (frame_len && *frame_len > max_frame)
            throw mqtt::DecodeError(mqtt::DecodeErrorKind::ProtocolViolation,
                                    "frame of " + std::to_string(*frame_len) +
                                        " bytes exceeds the stream limit");
        if (frame_len && *frame_len <= buf_.size()) {
            mqtt::Packet packet = mqtt::decode_packet(ByteView(buf_.data(), *frame_len));
            buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(*frame_len));
            return packet;
        }

        std::optional<std::chrono::milliseconds> remaining;
        if (timeout) {
            auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - started);
            if (elapsed >= *timeout)
                throw TransportError(TransportError::Kind::Timeout, "receive timed out");
            remaining = *timeout - elapsed;
        }

        std::uint8_t chunk[4096];
        std::size_t n = sock_.recv_some(chunk, sizeof(chunk), remaining);
        if (n == 0) {
            if (buf_.empty()) return std::nullopt;  // clean close between packets
            throw TransportError(TransportError::Kind::Closed,
                                 "connection closed mid-packet");
        }
        if (tap) tap(false, ByteView(chunk, n));
        buf_.insert(buf_.end(), chunk, chunk + n);
    }
}

}  // namespace smoker::net
