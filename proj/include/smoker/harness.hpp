/*
 * Copyright (c) the smoker authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "smoker/mqtt.hpp"
#include "smoker/net.hpp"

namespace smoker::harness {

/// Every byte that crossed any scripted connection, with direction and a
/// timestamp relative to scenario start.
struct TranscriptEntry {
    std::chrono::microseconds at{0};
    std::string conn;
    bool outbound = false;  // true: harness -> broker
    Bytes bytes;
};

struct Transcript {
    std::vector<TranscriptEntry> entries;

    /// Hex-dump text, one entry per line.
    std::string render() const;
    /// Concatenated bytes for one direction of one connection.
    Bytes bytes_of(const std::string& conn, bool outbound) const;
};

class ScenarioFailure : public std::runtime_error {
public:
    explicit ScenarioFailure(const std::string& what) : std::runtime_error(what) {}
};

/// Drives scripted TCP connections against a live broker. All
/// synchronization is via expect barriers; the context never sleeps.
class ScenarioContext {
public:
    ScenarioContext(std::string broker_host, std::uint16_t broker_port, Transcript& transcript);

    void open(const std::string& conn);
    /// For connections that must not go to the broker directly (proxies).
    void open_to(const std::string& conn, const std::string& host, std::uint16_t port);

    void send(const std::string& conn, const mqtt::Packet& packet);
    void send_raw(const std::string& conn, ByteView frame);

    /// Blocks until a packet of the given type arrives on conn; any other
    /// packet type fails the scenario.
    mqtt::Packet expect(const std::string& conn, mqtt::PacketType type);

    mqtt::Connack expect_connack(const std::string& conn, std::uint8_t reason);
    mqtt::Auth expect_auth_challenge(const std::string& conn);
    mqtt::Disconnect expect_disconnect(const std::string& conn);
    mqtt::Publish expect_publish(const std::string& conn);

    /// Barrier: the broker closes this connection (EOF or reset).
    void expect_close(const std::string& conn);

    /// Abruptly closes the connection from the harness side.
    void drop(const std::string& conn);

    /// Frames previously sent on conn, for replay by another connection
    /// (the passive observer's capture).
    const std::vector<Bytes>& sent_frames(const std::string& conn) const;

    const std::string& broker_host() const { return host_; }
    std::uint16_t broker_port() const { return port_; }

    void fail(const std::string& why) { throw ScenarioFailure(why); }

    static constexpr std::chrono::milliseconds kExpectTimeout{3000};

private:
    struct Conn {
        explicit Conn(net::Socket sock) : stream(std::move(sock)) {}
        net::PacketStream stream;
        std::vector<Bytes> sent;
    };

    Conn& get(const std::string& conn);

    std::string host_;
    std::uint16_t port_;
    Transcript& transcript_;
    std::chrono::steady_clock::time_point started_;
    std::map<std::string, std::unique_ptr<Conn>> conns_;
};

struct Scenario {
    std::string name;
    std::string summary;
    /// Documented demonstration of a known limitation: the scenario shows
    /// the attack SUCCEEDING and is excluded from the defensive count.
    bool expected_vulnerable = false;
    std::function<void(ScenarioContext&)> run;
};

struct Verdict {
    std::string name;
    bool pass = false;
    std::string detail;
    Transcript transcript;
};

/// The compiled-in scenario set; the nine defensive scenarios first.
std::vector<Scenario> builtin_scenarios();

const Scenario* find_scenario(const std::vector<Scenario>& scenarios, const std::string& name);

/// Runs one scenario over real TCP; optionally writes
/// <dir>/<name>.transcript.txt.
Verdict run_scenario(const Scenario& scenario, const std::string& broker_host,
                     std::uint16_t broker_port,
                     const std::optional<std::string>& transcript_dir = std::nullopt);

}  // namespace smoker::harness
