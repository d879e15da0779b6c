/*
 * Copyright (c) the smoker authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "smoker/nonce_service.hpp"

#include "smoker/random.hpp"
#include "smoker/sha256.hpp"

namespace smoker::broker {

NonceService NonceService::from_system_entropy() {
    SystemRandom rng;
    return NonceService(rng.array<32>());
}

std::array<std::uint8_t, 32> NonceService::next_nonce() {
    std::uint8_t ctr[8];
    for (int i = 0; i < 8; i++) ctr[i] = static_cast<std::uint8_t>(counter_ >> (8 * i));
    counter_++;
    return Sha256().update(state_).update(ByteView(ctr, 8)).finish();
}

void NonceService::reseed(ByteView entropy) {
    state_ = Sha256().update(state_).update(entropy).finish();
}

}  // namespace smoker::broker
