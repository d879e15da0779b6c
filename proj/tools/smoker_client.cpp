/*
 * Copyright (c) the smoker authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include <CLI11.hpp>

#include <csignal>
#include <cstdio>

#include "smoker/client.hpp"
#include "smoker/log.hpp"

using namespace smoker;

namespace {

constexpr int kExitAuthFailure = 2;
constexpr int kExitTransportFailure = 3;

volatile std::sig_atomic_t g_stop = 0;
void on_terminate(int) { g_stop = 1; }

int exit_code_for(const client::ConnectResult& result) {
    switch (result.status) {
        case client::ConnectStatus::Established:
            return 0;
        case client::ConnectStatus::BadMethod:
        case client::ConnectStatus::NotAuthorized:
        case client::ConnectStatus::IdRejected:
            return kExitAuthFailure;
        default:
            return kExitTransportFailure;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MQTT client with challenge-response session authentication"};
    app.require_subcommand(1);

    std::string key_file;
    std::string broker = "127.0.0.1:1883";
    std::string log_level = "warn";
    std::string topic;
    std::string message;

    app.add_option("--key", key_file, "key file (sk=<64 hex chars>)")->required();
    app.add_option("--broker", broker, "broker address, host:port")->capture_default_str();
    app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off")
        ->capture_default_str();

    auto* pub = app.add_subcommand("pub", "publish one message and exit");
    pub->add_option("topic", topic, "topic name")->required();
    pub->add_option("message", message, "payload")->required();

    auto* sub = app.add_subcommand("sub", "subscribe and print topic<TAB>payload lines");
    sub->add_option("topic", topic, "topic name")->required();

    CLI11_PARSE(app, argc, argv);

    logging::Level level;
    if (logging::parse_level(log_level, level)) logging::set_level(level);
    std::signal(SIGINT, on_terminate);
    std::signal(SIGTERM, on_terminate);
    std::signal(SIGPIPE, SIG_IGN);

    client::ClientConfig cfg;
    try {
        auto [host, port] = net::parse_host_port(broker, 1883);
        cfg.broker_host = host;
        cfg.broker_port = port;
        cfg.key_file = key_file;

        client::Client session(cfg);
        auto result = session.connect_and_authenticate();
        if (!result.ok()) {
            std::fprintf(stderr, "error: session not established (%s, reason 0x%02x) %s\n",
                         client::connect_status_name(result.status), result.reason_code,
                         result.detail.c_str());
            return exit_code_for(result);
        }

        if (pub->parsed()) {
            session.publish(topic, to_bytes(message));
            session.disconnect();
            return 0;
        }

        session.subscribe(topic);
        while (!g_stop) {
            auto delivery = session.await_message(std::chrono::milliseconds(500));
            if (!delivery) continue;
            std::string payload(delivery->payload.begin(), delivery->payload.end());
            std::printf("%s\t%s\n", delivery->topic.c_str(), payload.c_str());
            std::fflush(stdout);
        }
        session.disconnect();
        return 0;
    } catch (const net::TransportError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitTransportFailure;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
