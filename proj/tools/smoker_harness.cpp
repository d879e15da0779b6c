/*
 * Copyright (c) the smoker authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include <CLI11.hpp>

#include <cstdio>

#include "smoker/harness.hpp"

using namespace smoker;

int main(int argc, char** argv) {
    CLI::App app{"adversary scenario runner for the challenge-response broker"};
    app.require_subcommand(1);

    std::string broker = "127.0.0.1:1883";
    std::string scenario_name;
    std::string transcript_dir;

    auto* run = app.add_subcommand("run", "run scenarios against a live broker");
    run->add_option("--broker", broker, "broker address, host:port")->capture_default_str();
    run->add_option("--scenario", scenario_name, "run a single scenario by name");
    run->add_option("--transcript-dir", transcript_dir, "write hex transcripts here");

    auto* list = app.add_subcommand("list", "list built-in scenarios");

    CLI11_PARSE(app, argc, argv);

    auto scenarios = harness::builtin_scenarios();

    if (list->parsed()) {
        for (const auto& s : scenarios)
            std::printf("%-36s %s\n", s.name.c_str(), s.summary.c_str());
        return 0;
    }

    std::optional<std::string> dir;
    if (!transcript_dir.empty()) dir = transcript_dir;

    std::vector<const harness::Scenario*> selected;
    if (!scenario_name.empty()) {
        const auto* s = harness::find_scenario(scenarios, scenario_name);
        if (!s) {
            std::fprintf(stderr, "error: unknown scenario %s\n", scenario_name.c_str());
            return 1;
        }
        selected.push_back(s);
    } else {
        for (const auto& s : scenarios) selected.push_back(&s);
    }

    auto [host, port] = net::parse_host_port(broker, 1883);
    bool all_pass = true;
    for (const auto* s : selected) {
        auto verdict = harness::run_scenario(*s, host, port, dir);
        all_pass = all_pass && verdict.pass;
        std::printf("%s %-36s %s%s\n", verdict.pass ? "PASS" : "FAIL", s->name.c_str(),
                    verdict.detail.c_str(),
                    s->expected_vulnerable ? " [expected-vulnerable demonstration]" : "");
    }
    return all_pass ? 0 : 1;
}
