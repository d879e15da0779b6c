/*
 * Copyright (c) the smoker authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <fstream>

#include "smoker/broker.hpp"
#include "smoker/log.hpp"

using namespace smoker;

namespace {

volatile std::sig_atomic_t g_stop = 0;
volatile std::sig_atomic_t g_dump = 0;

void on_terminate(int) { g_stop = 1; }
void on_usr1(int) { g_dump = 1; }

std::array<std::uint8_t, 32> load_seed_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open seed file: " + path);
    std::string hex;
    in >> hex;
    Bytes raw = from_hex(hex);
    if (raw.size() != 32) throw std::runtime_error("seed file must hold 64 hex chars");
    std::array<std::uint8_t, 32> seed;
    std::copy(raw.begin(), raw.end(), seed.begin());
    return seed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MQTT 5.0 subset broker with challenge-response session authentication"};

    std::string listen = "0.0.0.0:1883";
    std::string seed_file;
    std::string dump_file;
    std::string log_level = "info";
    int auth_timeout_secs = 10;
    bool test_mode = false;

    app.add_option("--listen", listen, "listen address, addr:port")->capture_default_str();
    app.add_option("--seed-file", seed_file, "32-byte hex iv for the nonce service");
    app.add_option("--auth-timeout-secs", auth_timeout_secs,
                   "seconds a pending challenge may stay unanswered")
        ->capture_default_str();
    app.add_flag("--test-mode", test_mode, "enable fixed seeds and test behavior");
    app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off")
        ->capture_default_str();
    app.add_option("--dump-file", dump_file,
                   "registry dump target for SIGUSR1 (stderr when empty)");

    CLI11_PARSE(app, argc, argv);

    logging::Level level;
    if (!logging::parse_level(log_level, level)) {
        std::fprintf(stderr, "error: unknown log level %s\n", log_level.c_str());
        return 1;
    }
    logging::set_level(level);

    broker::BrokerConfig cfg;
    try {
        auto [host, port] = net::parse_host_port(listen, 1883);
        cfg.listen_addr = host;
        cfg.port = port;
        cfg.auth_timeout = std::chrono::seconds(auth_timeout_secs);
        cfg.test_mode = test_mode;
        if (!seed_file.empty()) cfg.nonce_seed = load_seed_file(seed_file);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }

    std::signal(SIGINT, on_terminate);
    std::signal(SIGTERM, on_terminate);
    std::signal(SIGUSR1, on_usr1);
    std::signal(SIGPIPE, SIG_IGN);

    broker::Broker broker(cfg);
    try {
        broker.start();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    std::printf("listening on %s:%u\n", cfg.listen_addr.c_str(),
                static_cast<unsigned>(broker.port()));
    std::fflush(stdout);

    while (!g_stop) {
        if (g_dump) {
            g_dump = 0;
            std::string dump = broker.dump_registry();
            if (dump_file.empty()) {
                std::fprintf(stderr, "%s", dump.c_str());
            } else {
                std::ofstream out(dump_file, std::ios::trunc);
                out << dump;
            }
        }
        pause();
    }
    broker.stop();
    return 0;
}
