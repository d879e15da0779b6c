/*
 * Copyright (c) the smoker authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <sodium.h>

#include <array>

#include "smoker/bytes.hpp"

namespace smoker {

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(ByteView data);

class Sha256 {
public:
    Sha256() { crypto_hash_sha256_init(&state_); }

    Sha256& update(ByteView data) {
        crypto_hash_sha256_update(&state_, data.data(), data.size());
        return *this;
    }

    Digest finish() {
        Digest out;
        crypto_hash_sha256_final(&state_, out.data());
        return out;
    }

private:
    crypto_hash_sha256_state state_;
};

inline Digest sha256(ByteView data) {
    Digest out;
    crypto_hash_sha256(out.data(), data.data(), data.size());
    return out;
}

/// Initializes libsodium once per process. Every entry point that touches
/// crypto calls this first; repeat calls are cheap.
void ensure_crypto_init();

}  // namespace smoker
