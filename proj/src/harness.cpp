/*
 * Copyright (c) the smoker authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "smoker/harness.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace smoker::harness {

std::string Transcript::render() const {
    std::ostringstream out;
    for (const auto& e : entries) {
        out << '+' << e.at.count() << "us\t" << e.conn << (e.outbound ? " -> " : " <- ")
            << "broker\t" << to_hex(ByteView(e.bytes.data(), e.bytes.size())) << '\n';
    }
    return out.str();
}

Bytes Transcript::bytes_of(const std::string& conn, bool outbound) const {
    Bytes out;
    for (const auto& e : entries)
        if (e.conn == conn && e.outbound == outbound) append(out, ByteView(e.bytes.data(), e.bytes.size()));
    return out;
}

ScenarioContext::ScenarioContext(std::string broker_host, std::uint16_t broker_port,
                                 Transcript& transcript)
    : host_(std::move(broker_host)),
      port_(broker_port),
      transcript_(transcript),
      started_(std::chrono::steady_clock::now()) {}

void ScenarioContext::open(const std::string& conn) { open_to(conn, host_, port_); }

void ScenarioContext::open_to(const std::string& conn, const std::string& host,
                              std::uint16_t port) {
    if (conns_.count(conn)) fail("connection name reused: " + conn);
    net::Socket sock;
    try {
        sock = net::Socket::connect(host, port, kExpectTimeout);
    } catch (const net::TransportError& e) {
        fail("cannot reach broker: " + std::string(e.what()));
    }
    auto c = std::make_unique<Conn>(std::move(sock));
    c->stream.tap = [this, conn](bool outbound, ByteView bytes) {
        TranscriptEntry entry;
        entry.at = std::chrono::duration_cast<std::chrono::microseconds>(
            std::chrono::steady_clock::now() - started_);
        entry.conn = conn;
        entry.outbound = outbound;
        entry.bytes.assign(bytes.begin(), bytes.end());
        transcript_.entries.push_back(std::move(entry));
    };
    conns_.emplace(conn, std::move(c));
}

ScenarioContext::Conn& ScenarioContext::get(const std::string& conn) {
    auto it = conns_.find(conn);
    if (it == conns_.end()) throw ScenarioFailure("unknown connection: " + conn);
    return *it->second;
}

void ScenarioContext::send(const std::string& conn, const mqtt::Packet& packet) {
    send_raw(conn, mqtt::encode_packet(packet));
}

void ScenarioContext::send_raw(const std::string& conn, ByteView frame) {
    Conn& c = get(conn);
    c.sent.emplace_back(frame.begin(), frame.end());
    try {
        c.stream.send_raw(frame);
    } catch (const net::TransportError& e) {
        fail("send on " + conn + " failed: " + e.what());
    }
}

mqtt::Packet ScenarioContext::expect(const std::string& conn, mqtt::PacketType type) {
    Conn& c = get(conn);
    std::optional<mqtt::Packet> packet;
    try {
        packet = c.stream.recv(kExpectTimeout);
    } catch (const net::TransportError& e) {
        fail("expected " + std::string(mqtt::packet_type_name(type)) + " on " + conn + ": " +
             e.what());
    }
    if (!packet)
        fail("expected " + std::string(mqtt::packet_type_name(type)) + " on " + conn +
             " but the broker closed the connection");
    if (mqtt::packet_type(*packet) != type)
        fail("expected " + std::string(mqtt::packet_type_name(type)) + " on " + conn +
             " but received " + mqtt::packet_type_name(mqtt::packet_type(*packet)));
    return *packet;
}

mqtt::Connack ScenarioContext::expect_connack(const std::string& conn, std::uint8_t reason) {
    auto packet = expect(conn, mqtt::PacketType::Connack);
    auto connack = std::get<mqtt::Connack>(packet);
    if (connack.reason != reason) {
        std::ostringstream why;
        why << "expected CONNACK reason 0x" << std::hex << int(reason) << " on " << conn
            << " but received 0x" << int(connack.reason);
        fail(why.str());
    }
    return connack;
}

mqtt::Auth ScenarioContext::expect_auth_challenge(const std::string& conn) {
    auto packet = expect(conn, mqtt::PacketType::Auth);
    auto auth = std::get<mqtt::Auth>(packet);
    if (auth.reason != mqtt::reason::kContinueAuthentication)
        fail("challenge AUTH does not carry reason 0x18");
    if (!auth.props.data || auth.props.data->size() != 32)
        fail("challenge AUTH does not carry a 32-byte nonce");
    return auth;
}

mqtt::Disconnect ScenarioContext::expect_disconnect(const std::string& conn) {
    return std::get<mqtt::Disconnect>(expect(conn, mqtt::PacketType::Disconnect));
}

mqtt::Publish ScenarioContext::expect_publish(const std::string& conn) {
    return std::get<mqtt::Publish>(expect(conn, mqtt::PacketType::Publish));
}

void ScenarioContext::expect_close(const std::string& conn) {
    Conn& c = get(conn);
    try {
        auto packet = c.stream.recv(kExpectTimeout);
        if (packet)
            fail("expected close on " + conn + " but received " +
                 mqtt::packet_type_name(mqtt::packet_type(*packet)));
        // nullopt: orderly EOF
    } catch (const net::TransportError& e) {
        if (e.kind == net::TransportError::Kind::Timeout)
            fail("expected close on " + conn + " but the connection stayed open");
        // reset/shutdown counts as closed
    }
}

void ScenarioContext::drop(const std::string& conn) {
    get(conn).stream.socket().close();
    conns_.erase(conn);
}

const std::vector<Bytes>& ScenarioContext::sent_frames(const std::string& conn) const {
    auto it = conns_.find(conn);
    if (it == conns_.end()) throw ScenarioFailure("unknown connection: " + conn);
    return it->second->sent;
}

const Scenario* find_scenario(const std::vector<Scenario>& scenarios, const std::string& name) {
    for (const auto& s : scenarios)
        if (s.name == name) return &s;
    return nullptr;
}

Verdict run_scenario(const Scenario& scenario, const std::string& broker_host,
                     std::uint16_t broker_port,
                     const std::optional<std::string>& transcript_dir) {
    Verdict verdict;
    verdict.name = scenario.name;
    ScenarioContext ctx(broker_host, broker_port, verdict.transcript);
    try {
        scenario.run(ctx);
        verdict.pass = true;
        verdict.detail = "ok";
    } catch (const ScenarioFailure& e) {
        verdict.pass = false;
        verdict.detail = e.what();
    } catch (const std::exception& e) {
        verdict.pass = false;
        verdict.detail = std::string("error: ") + e.what();
    }
    if (transcript_dir) {
        std::filesystem::create_directories(*transcript_dir);
        std::ofstream out(*transcript_dir + "/" + scenario.name + ".transcript.txt",
                          std::ios::trunc);
        out << "# scenario: " << scenario.name << "\n# verdict: "
            << (verdict.pass ? "pass" : "fail") << " (" << verdict.detail << ")\n"
            << verdict.transcript.render();
    }
    return verdict;
}

}  // namespace smoker::harness
