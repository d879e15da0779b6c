/*
 * Copyright (c) the smoker authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "smoker/broker_core.hpp"
#include "smoker/net.hpp"

namespace smoker::broker {

/// TCP front of the broker: one accept loop, one serving thread per
/// connection, each driving its own ConnectionFsm. Cross-connection writes
/// (deliveries, evictions) go through per-peer write locks.
class Broker {
public:
    explicit Broker(BrokerConfig cfg);
    ~Broker();
    Broker(const Broker&) = delete;
    Broker& operator=(const Broker&) = delete;

    /// Binds and starts accepting. Throws net::TransportError on bind
    /// failure.
    void start();
    void stop();

    /// Actual bound port (differs from config when config asked for 0).
    std::uint16_t port() const { return port_; }

    std::string dump_registry() const;
    BrokerCore& core() { return core_; }

private:
    struct Peer {
        explicit Peer(net::Socket sock) : stream(std::move(sock)) {}
        net::PacketStream stream;
        std::mutex write_mu;
    };

    void accept_loop();
    void serve(std::uint64_t conn_id, std::shared_ptr<Peer> peer);
    void apply_reaction(std::shared_ptr<Peer>& self, const Reaction& reaction);
    bool send_to(std::uint64_t conn_id, const mqtt::Packet& packet);
    std::shared_ptr<Peer> find_peer(std::uint64_t conn_id);
    void reap_finished_threads();

    BrokerConfig cfg_;
    BrokerCore core_;
    std::optional<net::Listener> listener_;
    std::uint16_t port_ = 0;
    std::thread accept_thread_;
    std::atomic<bool> running_{false};
    std::atomic<std::uint64_t> next_conn_id_{1};

    mutable std::mutex peers_mu_;
    std::map<std::uint64_t, std::shared_ptr<Peer>> peers_;
    std::map<std::uint64_t, std::thread> conn_threads_;
    std::vector<std::uint64_t> finished_conns_;
};

}  // namespace smoker::broker
