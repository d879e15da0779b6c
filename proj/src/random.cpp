/*
 * Copyright (c) the smoker authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "smoker/random.hpp"

#include <sodium.h>

#include <cstring>
#include <stdexcept>

#include "smoker/sha256.hpp"

namespace smoker {

void ensure_crypto_init() {
    static const int rc = sodium_init();
    if (rc < 0) throw std::runtime_error("libsodium initialization failed");
}

void SystemRandom::fill(std::uint8_t* out, std::size_t n) {
    ensure_crypto_init();
    randombytes_buf(out, n);
}

DeterministicRandom::DeterministicRandom(std::uint64_t seed) : seed_{} {
    for (int i = 0; i < 8; i++) seed_[i] = static_cast<std::uint8_t>(seed >> (8 * i));
}

void DeterministicRandom::fill(std::uint8_t* out, std::size_t n) {
    ensure_crypto_init();
    while (n > 0) {
        if (block_used_ == 32) {
            std::uint8_t ctr[8];
            for (int i = 0; i < 8; i++) ctr[i] = static_cast<std::uint8_t>(counter_ >> (8 * i));
            block_ = Sha256().update(seed_).update(ByteView(ctr, 8)).finish();
            counter_++;
            block_used_ = 0;
        }
        std::size_t take = std::min(n, 32 - block_used_);
        std::memcpy(out, block_.data() + block_used_, take);
        block_used_ += take;
        out += take;
        n -= take;
    }
}

}  // namespace smoker
