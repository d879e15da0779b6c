/*
 * Copyright (c) the smoker authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "smoker/broker_core.hpp"

#include <stdexcept>

#include "smoker/identity.hpp"

namespace smoker::broker {

namespace {

NonceService make_nonce_service(const BrokerConfig& cfg) {
    if (cfg.nonce_seed) return NonceService(*cfg.nonce_seed);
    return NonceService::from_system_entropy();
}

mqtt::Connack connack(std::uint8_t reason) {
    mqtt::Connack p;
    p.reason = reason;
    return p;
}

mqtt::Disconnect disconnect_error() {
    mqtt::Disconnect p;
    p.reason = mqtt::reason::kImplementationSpecificError;
    return p;
}

}  // namespace

BrokerCore::BrokerCore(const BrokerConfig& cfg) : cfg_(cfg), nonces_(make_nonce_service(cfg)) {
    if (cfg.insecure_skip_nonce_check && !cfg.test_mode)
        throw std::invalid_argument("nonce check can only be disabled in test mode");
}

std::array<std::uint8_t, 32> BrokerCore::issue_nonce() {
    std::lock_guard lock(nonce_mu_);
    return nonces_.next_nonce();
}

void BrokerCore::absorb_entropy(ByteView entropy) {
    std::lock_guard lock(nonce_mu_);
    nonces_.reseed(entropy);
}

Reaction ConnectionFsm::protocol_violation(const char*) {
    Reaction r;
    r.replies.push_back(disconnect_error());
    r.close = true;
    phase_ = Phase::Closed;
    return r;
}

Reaction ConnectionFsm::reject_connack(std::uint8_t reason) {
    Reaction r;
    r.replies.push_back(connack(reason));
    r.close = true;
    phase_ = Phase::Closed;
    return r;
}

Reaction ConnectionFsm::on_packet(const mqtt::Packet& packet) {
    if (phase_ == Phase::Closed) return Reaction{};
    switch (mqtt::packet_type(packet)) {
        case mqtt::PacketType::Connect:
            return handle_connect(std::get<mqtt::Connect>(packet));
        case mqtt::PacketType::Auth:
            return handle_auth(std::get<mqtt::Auth>(packet));
        case mqtt::PacketType::Publish:
            return handle_publish(std::get<mqtt::Publish>(packet));
        case mqtt::PacketType::Subscribe:
            return handle_subscribe(std::get<mqtt::Subscribe>(packet));
        case mqtt::PacketType::Pingreq: {
            if (phase_ != Phase::Active) return protocol_violation("ping before session");
            Reaction r;
            r.replies.push_back(mqtt::Pingresp{});
            return r;
        }
        case mqtt::PacketType::Disconnect: {
            Reaction r;
            r.close = true;
            phase_ = Phase::Closed;
            return r;
        }
        default:
            // server-to-client packet arriving at the server
            return protocol_violation("unexpected packet direction");
    }
}

Reaction ConnectionFsm::handle_connect(const mqtt::Connect& pkt) {
    if (phase_ != Phase::AwaitingConnect) return protocol_violation("second CONNECT");
    keep_alive_ = pkt.keep_alive;

    if (pkt.props.method) {
        if (*pkt.props.method != kAuthMethodName) {
            // unknown method: CONNACK 0x8C, then the broker closes
            return reject_connack(mqtt::reason::kBadAuthenticationMethod);
        }
        try {
            pk_ = identity::decode_client_id(pkt.client_id);
        } catch (const identity::InvalidClientId&) {
            return reject_connack(mqtt::reason::kClientIdentifierNotValid);
        }
        client_id_ = pkt.client_id;
        nonce_ = core_.issue_nonce();
        phase_ = Phase::ChallengeSent;

        mqtt::Auth challenge;
        challenge.reason = mqtt::reason::kContinueAuthentication;
        challenge.props.method = kAuthMethodName;
        challenge.props.data = Bytes(nonce_.begin(), nonce_.end());
        Reaction r;
        r.replies.push_back(std::move(challenge));
        return r;
    }

    // No authentication method: the broker's default (unauthenticated)
    // session handling. Such sessions are evictable by an authenticated
    // owner of the same clientID.
    if (pkt.client_id.empty())
        return reject_connack(mqtt::reason::kClientIdentifierNotValid);

    auto admit = core_.registry().admit(pkt.client_id, false, conn_id_);
    if (admit.action == ConflictAction::RejectNewcomer)
        return reject_connack(mqtt::reason::kClientIdentifierNotValid);

    client_id_ = pkt.client_id;
    authenticated_ = false;
    phase_ = Phase::Active;

    Reaction r;
    if (admit.evicted_conn) {
        r.forwards.emplace_back(*admit.evicted_conn, disconnect_error());
        r.evict_conn = *admit.evicted_conn;
    }
    r.replies.push_back(connack(mqtt::reason::kSuccess));
    return r;
}

Reaction ConnectionFsm::handle_auth(const mqtt::Auth& pkt) {
    if (phase_ != Phase::ChallengeSent)
        return protocol_violation("AUTH outside challenge exchange");
    if (!pkt.props.method || *pkt.props.method != kAuthMethodName ||
        pkt.reason != mqtt::reason::kContinueAuthentication)
        return protocol_violation("AUTH does not continue the negotiated method");

    auto failed = [this] { return reject_connack(mqtt::reason::kNotAuthorized); };
    if (!pkt.props.data) return failed();

    std::optional<Bytes> message;
    try {
        message = sig::verify(pk_, ByteView(pkt.props.data->data(), pkt.props.data->size()));
    } catch (const sig::MalformedBlob&) {
        return failed();
    }
    if (!message) return failed();

    const bool nonce_matches = ct_equal(ByteView(message->data(), message->size()),
                                        ByteView(nonce_.data(), nonce_.size()));
    if (!nonce_matches && !core_.config().insecure_skip_nonce_check) return failed();

    // Proof accepted: arbitration against any incumbent holding this
    // clientID, then the session goes live.
    auto admit = core_.registry().admit(client_id_, true, conn_id_);
    authenticated_ = true;
    phase_ = Phase::Active;
    core_.absorb_entropy(ByteView(pkt.props.data->data(), pkt.props.data->size()));

    Reaction r;
    if (admit.evicted_conn) {
        r.forwards.emplace_back(*admit.evicted_conn, disconnect_error());
        r.evict_conn = *admit.evicted_conn;
    }
    mqtt::Connack ok;
    ok.reason = mqtt::reason::kSuccess;
    ok.props.method = kAuthMethodName;
    r.replies.push_back(std::move(ok));
    return r;
}

Reaction ConnectionFsm::handle_publish(const mqtt::Publish& pkt) {
    if (phase_ != Phase::Active) return protocol_violation("publish before session accepted");
    Reaction r;
    for (std::uint64_t conn : core_.registry().subscribers_of(pkt.topic))
        r.forwards.emplace_back(conn, pkt);
    return r;
}

Reaction ConnectionFsm::handle_subscribe(const mqtt::Subscribe& pkt) {
    if (phase_ != Phase::Active) return protocol_violation("subscribe before session accepted");
    for (const auto& topic : pkt.topics) {
        // exact-match routing only; a wildcard filter would never match
        if (topic.find('+') != std::string::npos || topic.find('#') != std::string::npos)
            return protocol_violation("wildcard subscriptions unsupported");
    }
    for (const auto& topic : pkt.topics) core_.registry().subscribe(conn_id_, topic);
    mqtt::Suback ack;
    ack.packet_id = pkt.packet_id;
    ack.reasons.assign(pkt.topics.size(), mqtt::reason::kSuccess);
    Reaction r;
    r.replies.push_back(std::move(ack));
    return r;
}

Reaction ConnectionFsm::on_auth_deadline() {
    if (phase_ != Phase::ChallengeSent) return Reaction{};
    return protocol_violation("challenge answer deadline expired");
}

void ConnectionFsm::on_connection_closed() {
    core_.registry().remove_conn(conn_id_);
    phase_ = Phase::Closed;
}

}  // namespace smoker::broker
