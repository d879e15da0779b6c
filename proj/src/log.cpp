/*
 * Copyright (c) the smoker authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "smoker/log.hpp"

#include <atomic>
#include <cstdio>
#include <mutex>

namespace smoker::logging {

namespace {

std::atomic<Level> g_level{Level::Warn};
std::mutex g_mu;

const char* level_tag(Level level) {
    switch (level) {
        case Level::Trace: return "trace";
        case Level::Debug: return "debug";
        case Level::Info: return "info";
        case Level::Warn: return "warn";
        case Level::Error: return "error";
        case Level::Off: return "off";
    }
    return "?";
}

}  // namespace

void set_level(Level level) { g_level = level; }

Level level() { return g_level; }

bool parse_level(std::string_view name, Level& out) {
    for (Level l : {Level::Trace, Level::Debug, Level::Info, Level::Warn, Level::Error,
                    Level::Off}) {
        if (name == level_tag(l)) {
            out = l;
            return true;
        }
    }
    return false;
}

void write(Level level, const std::string& message) {
    if (level < g_level) return;
    std::lock_guard lock(g_mu);
    std::fprintf(stderr, "[%s] %s\n", level_tag(level), message.c_str());
}

}  // namespace smoker::logging
