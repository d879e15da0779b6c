/*
 * Copyright (c) the smoker authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "smoker/client.hpp"

#include "smoker/broker_core.hpp"
#include "smoker/log.hpp"

namespace smoker::client {

namespace {

sig::SigningKey load_key(const ClientConfig& cfg) {
    if (cfg.key) return *cfg.key;
    return sig::SigningKey::load_file(cfg.key_file);
}

ConnectResult from_connack_reason(std::uint8_t reason) {
    ConnectResult r;
    r.reason_code = reason;
    switch (reason) {
        case mqtt::reason::kSuccess:
            r.status = ConnectStatus::Established;
            break;
        case mqtt::reason::kBadAuthenticationMethod:
            r.status = ConnectStatus::BadMethod;
            break;
        case mqtt::reason::kNotAuthorized:
            r.status = ConnectStatus::NotAuthorized;
            break;
        case mqtt::reason::kClientIdentifierNotValid:
            r.status = ConnectStatus::IdRejected;
            break;
        default:
            r.status = ConnectStatus::ProtocolError;
            r.detail = "unexpected CONNACK reason";
            break;
    }
    return r;
}

}  // namespace

const char* connect_status_name(ConnectStatus status) {
    switch (status) {
        case ConnectStatus::Established: return "established";
        case ConnectStatus::BadMethod: return "bad-method";
        case ConnectStatus::NotAuthorized: return "not-authorized";
        case ConnectStatus::IdRejected: return "id-rejected";
        case ConnectStatus::Timeout: return "timeout";
        case ConnectStatus::MalformedChallenge: return "malformed-challenge";
        case ConnectStatus::TransportFailed: return "transport-failed";
        case ConnectStatus::ProtocolError: return "protocol-error";
    }
    return "?";
}

Client::Client(ClientConfig cfg)
    : cfg_(std::move(cfg)),
      key_(load_key(cfg_)),
      client_id_(identity::derive_client_id(key_.verifying_key())) {}

net::PacketStream& Client::require_stream() {
    if (!stream_)
        throw net::TransportError(net::TransportError::Kind::Failed,
                                  "no session; call connect_and_authenticate first");
    return *stream_;
}

mqtt::Packet Client::recv_dispatch(std::chrono::milliseconds timeout) {
    auto packet = require_stream().recv(timeout);
    if (!packet)
        throw net::TransportError(net::TransportError::Kind::Closed,
                                  "broker closed the connection");
    return *packet;
}

mqtt::Packet Client::recv_expect(mqtt::PacketType type) {
    for (;;) {
        mqtt::Packet packet = recv_dispatch(cfg_.io_timeout);
        if (mqtt::packet_type(packet) == type) return packet;
        if (auto* publish = std::get_if<mqtt::Publish>(&packet)) {
            inbox_.push_back(*publish);
            continue;
        }
        if (auto* bye = std::get_if<mqtt::Disconnect>(&packet))
            throw net::TransportError(net::TransportError::Kind::Closed,
                                      "broker disconnected, reason " +
                                          std::to_string(bye->reason));
        throw net::TransportError(net::TransportError::Kind::Failed,
                                  std::string("unexpected ") +
                                      mqtt::packet_type_name(mqtt::packet_type(packet)));
    }
}

ConnectResult Client::connect_and_authenticate() {
    established_ = false;
    stream_.reset();
    inbox_.clear();

    try {
        stream_.emplace(net::Socket::connect(cfg_.broker_host, cfg_.broker_port,
                                             cfg_.io_timeout));

        mqtt::Connect connect;
        connect.client_id = cfg_.forced_client_id.value_or(client_id_.text);
        connect.keep_alive = cfg_.keep_alive;
        connect.props.method = cfg_.forced_auth_method.value_or(broker::kAuthMethodName);
        stream_->send(connect);

        // the broker either challenges us or refuses outright
        mqtt::Packet first = recv_dispatch(cfg_.io_timeout);
        if (auto* connack = std::get_if<mqtt::Connack>(&first))
            return from_connack_reason(connack->reason);
        auto* challenge = std::get_if<mqtt::Auth>(&first);
        if (!challenge || challenge->reason != mqtt::reason::kContinueAuthentication)
            return ConnectResult{ConnectStatus::ProtocolError, 0, "expected AUTH challenge"};
        if (!challenge->props.data)
            return ConnectResult{ConnectStatus::MalformedChallenge, 0, "challenge carries no nonce"};
        if (challenge->props.data->size() != 32)
            return ConnectResult{ConnectStatus::MalformedChallenge, 0,
                                 "challenge nonce is not 32 bytes"};
        last_nonce_ = *challenge->props.data;

        mqtt::Auth answer;
        answer.reason = mqtt::reason::kContinueAuthentication;
        answer.props.method = cfg_.forced_auth_method.value_or(broker::kAuthMethodName);
        answer.props.data =
            forced_auth_response
                ? *forced_auth_response
                : sig::sign(key_, ByteView(last_nonce_.data(), last_nonce_.size())).blob;
        stream_->send(answer);

        mqtt::Packet second = recv_dispatch(cfg_.io_timeout);
        if (auto* connack = std::get_if<mqtt::Connack>(&second)) {
            ConnectResult result = from_connack_reason(connack->reason);
            established_ = result.ok();
            return result;
        }
        return ConnectResult{ConnectStatus::ProtocolError, 0, "expected CONNACK"};
    } catch (const net::TransportError& e) {
        ConnectResult r;
        r.status = e.kind == net::TransportError::Kind::Timeout ? ConnectStatus::Timeout
                                                                : ConnectStatus::TransportFailed;
        r.detail = e.what();
        return r;
    } catch (const mqtt::DecodeError& e) {
        return ConnectResult{ConnectStatus::ProtocolError, 0, e.what()};
    }
}

ConnectResult Client::reconnect() { return connect_and_authenticate(); }

void Client::publish(const std::string& topic, ByteView payload) {
    mqtt::Publish p;
    p.topic = topic;
    p.payload.assign(payload.begin(), payload.end());
    require_stream().send(p);
}

void Client::subscribe(const std::string& topic) {
    mqtt::Subscribe sub;
    sub.packet_id = next_packet_id_++;
    sub.topics.push_back(topic);
    require_stream().send(sub);
    auto packet = recv_expect(mqtt::PacketType::Suback);
    const auto& ack = std::get<mqtt::Suback>(packet);
    if (ack.packet_id != sub.packet_id)
        throw net::TransportError(net::TransportError::Kind::Failed,
                                  "suback for a different subscribe");
}

void Client::ping() {
    require_stream().send(mqtt::Pingreq{});
    recv_expect(mqtt::PacketType::Pingresp);
}

std::optional<mqtt::Publish> Client::await_message(std::chrono::milliseconds timeout) {
    if (!inbox_.empty()) {
        mqtt::Publish out = std::move(inbox_.front());
        inbox_.pop_front();
        return out;
    }
    try {
        mqtt::Packet packet = recv_dispatch(timeout);
        if (auto* publish = std::get_if<mqtt::Publish>(&packet)) return *publish;
        throw net::TransportError(net::TransportError::Kind::Failed,
                                  std::string("unexpected ") +
                                      mqtt::packet_type_name(mqtt::packet_type(packet)));
    } catch (const net::TransportError& e) {
        if (e.kind == net::TransportError::Kind::Timeout) return std::nullopt;
        throw;
    }
}

void Client::disconnect() {
    if (!stream_) return;
    try {
        stream_->send(mqtt::Disconnect{});
    } catch (const net::TransportError&) {
    }
    stream_.reset();
    established_ = false;
}

}  // namespace smoker::client
