/*
 * Copyright (c) the smoker authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <array>
#include <cstdint>

#include "smoker/bytes.hpp"

namespace smoker::broker {

/// Hash-chain nonce generator. Output i is SHA-256(state || counter);
/// reseeding folds caller entropy into the state: state' = SHA-256(state ||
/// entropy). Client auth responses are fed back in so client-side entropy
/// accumulates in the broker, which often lacks natural sources of its own.
///
/// Not synchronized; BrokerCore serializes access.
class NonceService {
public:
    explicit NonceService(const std::array<std::uint8_t, 32>& seed) : state_(seed) {}

    /// Seeds from OS randomness.
    static NonceService from_system_entropy();

    std::array<std::uint8_t, 32> next_nonce();

    /// Folds entropy into the state; empty input still advances the state.
    void reseed(ByteView entropy);

private:
    std::array<std::uint8_t, 32> state_;
    std::uint64_t counter_ = 0;
};

}  // namespace smoker::broker
