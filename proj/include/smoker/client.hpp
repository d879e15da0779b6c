/*
 * Copyright (c) the smoker authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <chrono>
#include <deque>
#include <optional>
#include <string>

#include "smoker/identity.hpp"
#include "smoker/net.hpp"
#include "smoker/sigscheme.hpp"

namespace smoker::client {

struct ClientConfig {
    std::string broker_host = "127.0.0.1";
    std::uint16_t broker_port = 1883;
    /// Key file path; ignored when `key` is set directly.
    std::string key_file;
    std::optional<sig::SigningKey> key;
    std::uint16_t keep_alive = 60;
    std::chrono::milliseconds io_timeout{5000};

    // test hooks
    std::optional<std::string> forced_client_id;
    std::optional<std::string> forced_auth_method;
};

enum class ConnectStatus {
    Established,
    BadMethod,           // CONNACK 0x8C
    NotAuthorized,       // CONNACK 0x87
    IdRejected,          // CONNACK 0x85
    Timeout,
    MalformedChallenge,  // challenge nonce is not 32 bytes
    TransportFailed,
    ProtocolError,       // unexpected packet or reason code
};

const char* connect_status_name(ConnectStatus status);

struct ConnectResult {
    ConnectStatus status = ConnectStatus::TransportFailed;
    std::uint8_t reason_code = 0;
    std::string detail;

    bool ok() const { return status == ConnectStatus::Established; }
};

/// One MQTT session under the challenge-response scheme. The clientID is
/// derived from the key once at construction and cached, so each
/// (re)connection costs exactly one signing operation.
class Client {
public:
    explicit Client(ClientConfig cfg);

    /// CONNECT with the auth method set, answer the broker's challenge with
    /// a signature over the nonce, and wait for the final CONNACK.
    ConnectResult connect_and_authenticate();

    /// Same procedure as the very first connect: new TCP connection, fresh
    /// challenge, fresh proof.
    ConnectResult reconnect();

    void publish(const std::string& topic, ByteView payload);
    void subscribe(const std::string& topic);
    /// Round trip to the broker; proves the session is still live.
    void ping();
    std::optional<mqtt::Publish> await_message(std::chrono::milliseconds timeout);
    void disconnect();

    bool session_established() const { return established_; }
    const identity::ClientId& client_id() const { return client_id_; }
    /// Challenge nonce from the most recent handshake (test observation).
    const Bytes& last_nonce() const { return last_nonce_; }

    /// Test hook: send these bytes as the challenge answer instead of a
    /// fresh signature (replay experiments).
    std::optional<Bytes> forced_auth_response;

private:
    net::PacketStream& require_stream();
    mqtt::Packet recv_dispatch(std::chrono::milliseconds timeout);
    mqtt::Packet recv_expect(mqtt::PacketType type);

    ClientConfig cfg_;
    sig::SigningKey key_;
    identity::ClientId client_id_;
    std::optional<net::PacketStream> stream_;
    std::deque<mqtt::Publish> inbox_;
    Bytes last_nonce_;
    bool established_ = false;
    std::uint16_t next_packet_id_ = 1;
};

}  // namespace smoker::client
