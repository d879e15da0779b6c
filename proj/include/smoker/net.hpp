/*
 * Copyright (c) the smoker authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "smoker/bytes.hpp"
#include "smoker/mqtt.hpp"

namespace smoker::net {

class TransportError : public std::runtime_error {
public:
    enum class Kind { Closed, Timeout, Failed };
    TransportError(Kind kind, const std::string& what) : std::runtime_error(what), kind(kind) {}
    Kind kind;
};

/// Blocking TCP socket, RAII over the fd.
class Socket {
public:
    Socket() = default;
    explicit Socket(int fd) : fd_(fd) {}
    Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
    Socket& operator=(Socket&& other) noexcept;
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;
    ~Socket() { close(); }

    static Socket connect(const std::string& host, std::uint16_t port,
                          std::chrono::milliseconds timeout);

    void send_all(ByteView data);

    /// Returns 0 on orderly EOF; throws TransportError::Timeout when the
    /// deadline passes with no data.
    std::size_t recv_some(std::uint8_t* buf, std::size_t cap,
                          std::optional<std::chrono::milliseconds> timeout);

    /// Unblocks any thread sleeping in recv on this socket.
    void shutdown_both() noexcept;
    void close() noexcept;

    int fd() const { return fd_; }
    bool valid() const { return fd_ >= 0; }

private:
    int fd_ = -1;
};

class Listener {
public:
    Listener(const std::string& addr, std::uint16_t port);
    ~Listener();
    Listener(const Listener&) = delete;
    Listener& operator=(const Listener&) = delete;

    /// Throws TransportError::Closed once close() was called.
    Socket accept();

    std::uint16_t port() const { return port_; }

    /// Thread-safe; unblocks a pending accept.
    void close() noexcept;

private:
    int fd_ = -1;
    int wake_pipe_[2] = {-1, -1};
    std::uint16_t port_ = 0;
};

/// "host:port" with an optional port.
std::pair<std::string, std::uint16_t> parse_host_port(const std::string& s,
                                                      std::uint16_t default_port);

/// MQTT packet framing over a socket. `tap`, when set, sees every byte that
/// crosses the wire in either direction. Frames whose declared length
/// exceeds `max_frame` are rejected before being buffered, so a peer cannot
/// make us stage hundreds of megabytes.
class PacketStream {
public:
    explicit PacketStream(Socket sock) : sock_(std::move(sock)) {}

    void send(const mqtt::Packet& p) { send_raw(mqtt::encode_packet(p)); }
    void send_raw(ByteView frame);

    /// One packet, or nullopt on orderly close at a packet boundary.
    /// Throws TransportError on timeout/abort, DecodeError on bad bytes.
    std::optional<mqtt::Packet> recv(std::optional<std::chrono::milliseconds> timeout);

    Socket& socket() { return sock_; }

    std::function<void(bool outbound, ByteView bytes)> tap;
    std::size_t max_frame = 1 << 20;

private:
    Socket sock_;
    Bytes buf_;
};

}  // namespace smoker::net
