/*
 * Copyright (c) the smoker authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "smoker/mqtt.hpp"
#include "smoker/nonce_service.hpp"
#include "smoker/session_registry.hpp"
#include "smoker/sigscheme.hpp"

namespace smoker::broker {

inline constexpr const char* kAuthMethodName = "SMOKER";

struct BrokerConfig {
    std::string listen_addr = "127.0.0.1";
    std::uint16_t port = 1883;  // 0 = ephemeral
    /// Nonce service iv; system entropy when absent.
    std::optional<std::array<std::uint8_t, 32>> nonce_seed;
    std::chrono::seconds auth_timeout{10};
    bool test_mode = false;
    /// Mutation-testing hook: accept any validly signed message without
    /// comparing it to the issued nonce. Only honored in test mode; exists
    /// so the harness can prove its replay scenarios catch a broken broker.
    bool insecure_skip_nonce_check = false;
};

/// State shared by every connection: nonce service and session registry.
class BrokerCore {
public:
    explicit BrokerCore(const BrokerConfig& cfg);

    std::array<std::uint8_t, 32> issue_nonce();
    void absorb_entropy(ByteView entropy);

    SessionRegistry& registry() { return registry_; }
    const SessionRegistry& registry() const { return registry_; }
    const BrokerConfig& config() const { return cfg_; }

private:
    BrokerConfig cfg_;
    std::mutex nonce_mu_;
    NonceService nonces_;
    SessionRegistry registry_;
};

enum class Phase { AwaitingConnect, ChallengeSent, Active, Closed };

/// What the transport layer must do after feeding a packet to the state
/// machine.
struct Reaction {
    std::vector<mqtt::Packet> replies;  // to this connection, in order
    /// Packets for other connections: publish deliveries and the
    /// DISCONNECT sent to an evicted incumbent.
    std::vector<std::pair<std::uint64_t, mqtt::Packet>> forwards;
    /// Connection to shut down after its forward was sent (evicted
    /// incumbent).
    std::optional<std::uint64_t> evict_conn;
    bool close = false;
};

/// Per-connection protocol state machine, transport-agnostic. Driven by a
/// single logical task; shared state lives in BrokerCore.
///
/// AwaitingConnect -> ChallengeSent -> Active | Closed
///
/// A nonce is issued per CONNECT attempt, bound to this connection, and
/// compared only against proofs arriving on this connection.
class ConnectionFsm {
public:
    ConnectionFsm(std::uint64_t conn_id, BrokerCore& core) : conn_id_(conn_id), core_(core) {}

    Reaction on_packet(const mqtt::Packet& packet);

    /// Challenge answer deadline expired.
    Reaction on_auth_deadline();

    /// Transport saw EOF/error or executed Reaction::close; releases the
    /// registry entry this connection owns.
    void on_connection_closed();

    Phase phase() const { return phase_; }
    bool authenticated() const { return authenticated_; }
    const std::string& client_id() const { return client_id_; }
    std::uint16_t negotiated_keep_alive() const { return keep_alive_; }
    std::uint64_t conn_id() const { return conn_id_; }

    /// The outstanding challenge, for tests.
    const std::array<std::uint8_t, 32>& issued_nonce() const { return nonce_; }

private:
    Reaction handle_connect(const mqtt::Connect& pkt);
    Reaction handle_auth(const mqtt::Auth& pkt);
    Reaction handle_publish(const mqtt::Publish& pkt);
    Reaction handle_subscribe(const mqtt::Subscribe& pkt);
    Reaction protocol_violation(const char* what);
    Reaction reject_connack(std::uint8_t reason);

    std::uint64_t conn_id_;
    BrokerCore& core_;
    Phase phase_ = Phase::AwaitingConnect;
    std::string client_id_;
    sig::VerifyingKey pk_;
    std::array<std::uint8_t, 32> nonce_{};
    bool authenticated_ = false;
    std::uint16_t keep_alive_ = 0;
};

}  // namespace smoker::broker
