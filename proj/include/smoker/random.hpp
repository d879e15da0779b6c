/*
 * Copyright (c) the smoker authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <array>
#include <cstdint>
#include <cstddef>

#include "smoker/bytes.hpp"

namespace smoker {

class RandomSource {
public:
    virtual ~RandomSource() = default;
    virtual void fill(std::uint8_t* out, std::size_t n) = 0;

    Bytes bytes(std::size_t n) {
        Bytes out(n);
        fill(out.data(), n);
        return out;
    }

    template <std::size_t N>
    std::array<std::uint8_t, N> array() {
        std::array<std::uint8_t, N> out;
        fill(out.data(), N);
        return out;
    }
};

/// OS randomness via libsodium.
class SystemRandom final : public RandomSource {
public:
    void fill(std::uint8_t* out, std::size_t n) override;
};

/// Seeded stream for reproducible tests: block i = SHA-256(seed || i).
class DeterministicRandom final : public RandomSource {
public:
    explicit DeterministicRandom(std::array<std::uint8_t, 32> seed) : seed_(seed) {}
    explicit DeterministicRandom(std::uint64_t seed);

    void fill(std::uint8_t* out, std::size_t n) override;

private:
    std::array<std::uint8_t, 32> seed_;
    std::uint64_t counter_ = 0;
    std::array<std::uint8_t, 32> block_{};
    std::size_t block_used_ = 32;  // empty
};

}  // namespace smoker
