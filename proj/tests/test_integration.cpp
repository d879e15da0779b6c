#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <set>
#include <thread>

#include "smoker/broker.hpp"
#include "smoker/client.hpp"
#include "smoker/harness.hpp"
#include "smoker/identity.hpp"
#include "smoker/random.hpp"

using namespace smoker;

namespace {

ByteView view(const Bytes& b) { return ByteView(b.data(), b.size()); }

broker::BrokerConfig test_broker_config() {
    broker::BrokerConfig cfg;
    cfg.listen_addr = "127.0.0.1";
    cfg.port = 0;  // ephemeral
    cfg.test_mode = true;
    std::array<std::uint8_t, 32> seed;
    seed.fill(0x24);
    cfg.nonce_seed = seed;
    return cfg;
}

sig::SigningKey test_key(std::uint64_t seed) {
    DeterministicRandom rng(seed);
    return sig::SigningKey::generate(rng);
}

client::ClientConfig client_config(const broker::Broker& b, std::uint64_t key_seed) {
    client::ClientConfig cfg;
    cfg.broker_host = "127.0.0.1";
    cfg.broker_port = b.port();
    cfg.key = test_key(key_seed);
    cfg.keep_alive = 0;
    return cfg;
}

struct RunningBroker {
    explicit RunningBroker(broker::BrokerConfig cfg = test_broker_config()) : broker(cfg) {
        broker.start();
    }
    ~RunningBroker() { broker.stop(); }
    broker::Broker broker;
};

}  // namespace

TEST_CASE("client establishes, talks, and reconnects") {
    RunningBroker rb;
    client::Client alice(client_config(rb.broker, 1));

    auto result = alice.connect_and_authenticate();
    REQUIRE(result.ok());
    CHECK(result.reason_code == 0x00);
    CHECK(alice.session_established());

    SUBCASE("pub/sub round trip through a second client") {
        client::Client bob(client_config(rb.broker, 2));
        REQUIRE(bob.connect_and_authenticate().ok());

        alice.subscribe("garden/moisture");
        bob.publish("garden/moisture", view(to_bytes("0.37")));
        auto delivery = alice.await_message(std::chrono::milliseconds(2000));
        REQUIRE(delivery.has_value());
        CHECK(delivery->topic == "garden/moisture");
        CHECK(delivery->payload == to_bytes("0.37"));
    }

    SUBCASE("ten reconnects see ten distinct nonces") {
        std::set<Bytes> nonces;
        nonces.insert(alice.last_nonce());
        for (int i = 0; i < 10; i++) {
            REQUIRE(alice.reconnect().ok());
            nonces.insert(alice.last_nonce());
        }
        CHECK(nonces.size() == 11);
    }

    SUBCASE("registry dump lists the session and nothing secret") {
        std::string dump = rb.broker.dump_registry();
        CHECK(dump.find(alice.client_id().text) != std::string::npos);
        CHECK(dump.find("sk=") == std::string::npos);
        // exactly three tab-separated fields per line
        auto first_line = dump.substr(0, dump.find('\n'));
        CHECK(std::count(first_line.begin(), first_line.end(), '\t') == 2);
    }
}

TEST_CASE("client-side failure statuses") {
    RunningBroker rb;

    SUBCASE("unknown method") {
        auto cfg = client_config(rb.broker, 1);
        cfg.forced_auth_method = "UNKWN";
        client::Client c(cfg);
        auto result = c.connect_and_authenticate();
        CHECK(result.status == client::ConnectStatus::BadMethod);
        CHECK(result.reason_code == 0x8C);
    }
    SUBCASE("clientID rejected") {
        auto cfg = client_config(rb.broker, 1);
        cfg.forced_client_id = "short";
        client::Client c(cfg);
        auto result = c.connect_and_authenticate();
        CHECK(result.status == client::ConnectStatus::IdRejected);
        CHECK(result.reason_code == 0x85);
    }
    SUBCASE("key does not match the claimed clientID") {
        auto cfg = client_config(rb.broker, 1);
        cfg.forced_client_id = identity::derive_client_id(test_key(2).verifying_key()).text;
        client::Client c(cfg);
        auto result = c.connect_and_authenticate();
        CHECK(result.status == client::ConnectStatus::NotAuthorized);
        CHECK(result.reason_code == 0x87);
    }
    SUBCASE("replaying the previous proof") {
        client::Client honest(client_config(rb.broker, 1));
        REQUIRE(honest.connect_and_authenticate().ok());
        Bytes old_proof =
            sig::sign(test_key(1), view(honest.last_nonce())).blob;

        client::Client replayer(client_config(rb.broker, 1));
        replayer.forced_auth_response = old_proof;
        auto result = replayer.connect_and_authenticate();
        CHECK(result.status == client::ConnectStatus::NotAuthorized);
    }
    SUBCASE("broker unreachable") {
        client::ClientConfig cfg;
        cfg.broker_host = "127.0.0.1";
        cfg.broker_port = 1;  // nothing listens there
        cfg.key = test_key(1);
        client::Client c(cfg);
        auto result = c.connect_and_authenticate();
        CHECK(result.status == client::ConnectStatus::TransportFailed);
    }
}

TEST_CASE("challenge deadline tears down silent connections") {
    auto cfg = test_broker_config();
    cfg.auth_timeout = std::chrono::seconds(1);
    RunningBroker rb(cfg);

    auto key = test_key(1);
    auto id = identity::derive_client_id(key.verifying_key());

    net::PacketStream conn(net::Socket::connect("127.0.0.1", rb.broker.port(),
                                                std::chrono::milliseconds(1000)));
    mqtt::Connect connect;
    connect.client_id = id.text;
    connect.props.method = "SMOKER";
    conn.send(connect);
    (void)conn.recv(std::chrono::milliseconds(2000));  // the challenge

    // stay silent; the broker must disconnect us with 0x83
    auto packet = conn.recv(std::chrono::milliseconds(3000));
    REQUIRE(packet.has_value());
    CHECK(std::get<mqtt::Disconnect>(*packet).reason ==
          mqtt::reason::kImplementationSpecificError);
    auto eof = conn.recv(std::chrono::milliseconds(2000));
    CHECK_FALSE(eof.has_value());
}

TEST_CASE("a fresh key costs one derivation and one signature per connection") {
    RunningBroker rb;
    sig::reset_op_counts();
    client::Client c(client_config(rb.broker, 9));  // derivation happens here
    REQUIRE(c.connect_and_authenticate().ok());
    auto counts = sig::op_counts();
    CHECK(counts.key_derivations == 1);
    CHECK(counts.signatures == 1);
}

TEST_CASE("client methods refuse to run without a session") {
    client::ClientConfig cfg;
    cfg.key = test_key(1);
    client::Client c(cfg);
    CHECK_THROWS_AS(c.publish("t", view(to_bytes("x"))), net::TransportError);
    CHECK_THROWS_AS(c.subscribe("t"), net::TransportError);
    CHECK_THROWS_AS(c.ping(), net::TransportError);
    c.disconnect();  // harmless when never connected
}

TEST_CASE("oversized frame claims are cut off before buffering") {
    RunningBroker rb;
    net::PacketStream conn(net::Socket::connect("127.0.0.1", rb.broker.port(),
                                                std::chrono::milliseconds(1000)));
    // PUBLISH header claiming the maximum remaining length
    Bytes huge_header = from_hex("30ffffff7f");
    conn.send_raw(view(huge_header));
    auto packet = conn.recv(std::chrono::milliseconds(2000));
    REQUIRE(packet.has_value());
    CHECK(std::get<mqtt::Disconnect>(*packet).reason ==
          mqtt::reason::kImplementationSpecificError);
    CHECK_FALSE(conn.recv(std::chrono::milliseconds(2000)).has_value());
}

TEST_CASE("malformed bytes get DISCONNECT 0x83 and the connection drops") {
    RunningBroker rb;
    net::PacketStream conn(net::Socket::connect("127.0.0.1", rb.broker.port(),
                                                std::chrono::milliseconds(1000)));
    Bytes junk = from_hex("ff00");  // packet type 15 with flags set
    conn.send_raw(view(junk));
    auto packet = conn.recv(std::chrono::milliseconds(2000));
    REQUIRE(packet.has_value());
    CHECK(std::get<mqtt::Disconnect>(*packet).reason ==
          mqtt::reason::kImplementationSpecificError);
    CHECK_FALSE(conn.recv(std::chrono::milliseconds(2000)).has_value());
}

TEST_CASE("all built-in scenarios pass against the reference broker") {
    RunningBroker rb;
    auto scenarios = harness::builtin_scenarios();
    CHECK(scenarios.size() >= 9);
    for (const auto& scenario : scenarios) {
        auto verdict = harness::run_scenario(scenario, "127.0.0.1", rb.broker.port());
        INFO(scenario.name, ": ", verdict.detail);
        CHECK(verdict.pass);
        CHECK_FALSE(verdict.transcript.entries.empty());
    }
}

TEST_CASE("the secret key never appears on the wire") {
    RunningBroker rb;
    auto scenarios = harness::builtin_scenarios();
    const auto* honest = harness::find_scenario(scenarios, "honest");
    REQUIRE(honest != nullptr);
    auto verdict = harness::run_scenario(*honest, "127.0.0.1", rb.broker.port());
    REQUIRE(verdict.pass);

    // the honest scenario's actor derives its key from this fixed seed
    DeterministicRandom rng(1);
    auto key = sig::SigningKey::generate(rng);
    std::string seed_hex = to_hex(ByteView(key.seed().data(), 32));

    for (bool outbound : {true, false}) {
        std::string wire_hex = to_hex(view(verdict.transcript.bytes_of("client", outbound)));
        CHECK(wire_hex.find(seed_hex) == std::string::npos);
    }
}

TEST_CASE("scenario transcripts are reproducible modulo timestamps") {
    auto scenarios = harness::builtin_scenarios();
    const auto* honest = harness::find_scenario(scenarios, "honest");
    REQUIRE(honest != nullptr);

    auto run_once = [&] {
        RunningBroker rb;  // same fixed seed every time
        return harness::run_scenario(*honest, "127.0.0.1", rb.broker.port());
    };
    auto first = run_once();
    auto second = run_once();
    REQUIRE(first.pass);
    REQUIRE(second.pass);

    // compare everything except timing
    REQUIRE(first.transcript.entries.size() == second.transcript.entries.size());
    for (std::size_t i = 0; i < first.transcript.entries.size(); i++) {
        CHECK(first.transcript.entries[i].conn == second.transcript.entries[i].conn);
        CHECK(first.transcript.entries[i].outbound == second.transcript.entries[i].outbound);
        CHECK(first.transcript.entries[i].bytes == second.transcript.entries[i].bytes);
    }
}

TEST_CASE("replay scenarios catch a broker that skips the nonce comparison") {
    auto cfg = test_broker_config();
    cfg.insecure_skip_nonce_check = true;  // deliberately broken build
    RunningBroker rb(cfg);

    auto scenarios = harness::builtin_scenarios();
    for (const char* name : {"passive-observer-then-impersonate", "stale-nonce-replay"}) {
        const auto* scenario = harness::find_scenario(scenarios, name);
        REQUIRE(scenario != nullptr);
        auto verdict = harness::run_scenario(*scenario, "127.0.0.1", rb.broker.port());
        INFO(name, " must fail against the broken broker");
        CHECK_FALSE(verdict.pass);
    }

    // the honest flow still works, so the mutation is surgical
    const auto* honest = harness::find_scenario(scenarios, "honest");
    CHECK(harness::run_scenario(*honest, "127.0.0.1", rb.broker.port()).pass);
}

TEST_CASE("concurrent takeover wars and pub/sub churn stay consistent") {
    RunningBroker rb;
    std::atomic<int> established{0};
    std::vector<std::thread> threads;

    // six threads fight over two identities (constant takeover), six more
    // run pub/sub with identities of their own
    for (int t = 0; t < 12; t++) {
        threads.emplace_back([&, t] {
            client::ClientConfig cfg = client_config(rb.broker, t < 6 ? (t % 2) + 50 : 100 + t);
            cfg.io_timeout = std::chrono::milliseconds(4000);
            client::Client c(cfg);
            for (int i = 0; i < 15; i++) {
                if (!c.connect_and_authenticate().ok()) continue;
                established++;
                try {
                    if (t >= 6) {
                        const std::string topic = "stress/" + std::to_string(t);
                        c.subscribe(topic);
                        c.publish(topic, view(to_bytes("x")));
                        (void)c.await_message(std::chrono::milliseconds(1500));
                    } else {
                        c.publish("war/zone", view(to_bytes("y")));
                    }
                    c.disconnect();
                } catch (const std::exception&) {
                    // evicted mid-operation by a rival holding the same key
                }
            }
        });
    }
    for (auto& th : threads) th.join();

    // challenges are answered before the session is registered, so rivals
    // can never abort each other's handshakes: every attempt must land
    CHECK(established.load() == 12 * 15);
    CHECK(rb.broker.core().registry().size() <= 12);
}

TEST_CASE("keep-alive expiry closes the connection") {
    RunningBroker rb;
    auto key = test_key(5);
    net::PacketStream conn(net::Socket::connect("127.0.0.1", rb.broker.port(),
                                                std::chrono::milliseconds(1000)));
    mqtt::Connect connect;
    connect.client_id = "keepalive-probe";
    connect.keep_alive = 1;
    conn.send(connect);
    auto connack = conn.recv(std::chrono::milliseconds(2000));
    REQUIRE(connack.has_value());

    // stay silent past 1.5x the keep-alive; the broker drops us
    auto end = conn.recv(std::chrono::milliseconds(4000));
    CHECK_FALSE(end.has_value());
    (void)key;
}
