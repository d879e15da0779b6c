/*
 * Copyright (c) the smoker authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "smoker/broker.hpp"

#include "smoker/log.hpp"

namespace smoker::broker {

namespace {

// Keep-alive grace factor from the MQTT specification: the server waits one
// and a half times the keep-alive interval before dropping the connection.
std::optional<std::chrono::milliseconds> read_timeout(const ConnectionFsm& fsm,
                                                      const BrokerConfig& cfg) {
    if (fsm.phase() == Phase::ChallengeSent)
        return std::chrono::duration_cast<std::chrono::milliseconds>(cfg.auth_timeout);
    if (fsm.phase() == Phase::Active && fsm.negotiated_keep_alive() > 0)
        return std::chrono::milliseconds(fsm.negotiated_keep_alive() * 1500);
    return std::nullopt;
}

}  // namespace

Broker::Broker(BrokerConfig cfg) : cfg_(std::move(cfg)), core_(cfg_) {}

Broker::~Broker() { stop(); }

void Broker::start() {
    listener_.emplace(cfg_.listen_addr, cfg_.port);
    port_ = listener_->port();
    running_ = true;
    accept_thread_ = std::thread([this] { accept_loop(); });
    logging::info("broker listening on " + cfg_.listen_addr + ":" + std::to_string(port_));
}

void Broker::stop() {
    bool was_running = running_.exchange(false);
    if (!was_running && !accept_thread_.joinable()) return;
    if (listener_) listener_->close();
    if (accept_thread_.joinable()) accept_thread_.join();

    std::map<std::uint64_t, std::thread> threads;
    {
        std::lock_guard lock(peers_mu_);
        for (auto& [id, peer] : peers_) peer->stream.socket().shutdown_both();
        threads.swap(conn_threads_);
        finished_conns_.clear();
    }
    for (auto& [id, t] : threads)
        if (t.joinable()) t.join();
    listener_.reset();
}

// Joins threads whose connections already ended, so a long-lived broker does
// not accumulate one handle per connection ever accepted.
void Broker::reap_finished_threads() {
    std::vector<std::thread> done;
    {
        std::lock_guard lock(peers_mu_);
        for (std::uint64_t id : finished_conns_) {
            auto it = conn_threads_.find(id);
            if (it != conn_threads_.end()) {
                done.push_back(std::move(it->second));
                conn_threads_.erase(it);
            }
        }
        finished_conns_.clear();
    }
    for (auto& t : done)
        if (t.joinable()) t.join();
}

std::string Broker::dump_registry() const { return core_.registry().dump(); }

std::shared_ptr<Broker::Peer> Broker::find_peer(std::uint64_t conn_id) {
    std::lock_guard lock(peers_mu_);
    auto it = peers_.find(conn_id);
    return it == peers_.end() ? nullptr : it->second;
}

bool Broker::send_to(std::uint64_t conn_id, const mqtt::Packet& packet) {
    auto peer = find_peer(conn_id);
    if (!peer) return false;
    try {
        std::lock_guard lock(peer->write_mu);
        peer->stream.send(packet);
        return true;
    } catch (const net::TransportError&) {
        return false;  // peer is on its way out; its own thread cleans up
    }
}

void Broker::apply_reaction(std::shared_ptr<Peer>& self, const Reaction& reaction) {
    for (const auto& packet : reaction.replies) {
        std::lock_guard lock(self->write_mu);
        self->stream.send(packet);
    }
    for (const auto& [conn_id, packet] : reaction.forwards) send_to(conn_id, packet);
    if (reaction.evict_conn) {
        if (auto peer = find_peer(*reaction.evict_conn)) {
            logging::debug("evicting connection " + std::to_string(*reaction.evict_conn));
            peer->stream.socket().shutdown_both();
        }
    }
}

void Broker::accept_loop() {
    while (running_) {
        net::Socket sock;
        try {
            sock = listener_->accept();
        } catch (const net::TransportError&) {
            break;  // listener closed
        }
        reap_finished_threads();
        const std::uint64_t conn_id = next_conn_id_.fetch_add(1);
        auto peer = std::make_shared<Peer>(std::move(sock));
        std::lock_guard lock(peers_mu_);
        peers_.emplace(conn_id, peer);
        conn_threads_.emplace(conn_id,
                              std::thread([this, conn_id, peer] { serve(conn_id, peer); }));
    }
}

void Broker::serve(std::uint64_t conn_id, std::shared_ptr<Peer> peer) {
    ConnectionFsm fsm(conn_id, core_);
    logging::debug("connection " + std::to_string(conn_id) + " open");
    for (;;) {
        std::optional<mqtt::Packet> packet;
        try {
            packet = peer->stream.recv(read_timeout(fsm, cfg_));
        } catch (const net::TransportError& e) {
            if (e.kind == net::TransportError::Kind::Timeout &&
                fsm.phase() == Phase::ChallengeSent) {
                apply_reaction(peer, fsm.on_auth_deadline());
            }
            break;  // timeout, reset or shutdown: drop the connection
        } catch (const mqtt::DecodeError& e) {
            logging::debug("connection " + std::to_string(conn_id) + " sent bad bytes: " +
                           e.what());
            mqtt::Disconnect bye;
            bye.reason = mqtt::reason::kImplementationSpecificError;
            try {
                std::lock_guard lock(peer->write_mu);
                peer->stream.send(bye);
            } catch (const net::TransportError&) {
            }
            break;
        }
        if (!packet) break;  // orderly close

        Reaction reaction = fsm.on_packet(*packet);
        try {
            apply_reaction(peer, reaction);
        } catch (const net::TransportError&) {
            break;
        }
        if (reaction.close) break;
    }
    fsm.on_connection_closed();
    {
        std::lock_guard lock(peers_mu_);
        peers_.erase(conn_id);
        finished_conns_.push_back(conn_id);
    }
    logging::debug("connection " + std::to_string(conn_id) + " closed");
}

}  // namespace smoker::broker
