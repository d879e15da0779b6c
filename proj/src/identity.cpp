/*
 * Copyright (c) the smoker authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "smoker/identity.hpp"

#include <array>
#include <cstdint>

namespace smoker::identity {

namespace {

constexpr unsigned kBase = 62;

std::array<std::int8_t, 256> make_reverse_alphabet() {
    std::array<std::int8_t, 256> table;
    table.fill(-1);
    for (std::size_t i = 0; i < kAlphabet.size(); i++)
        table[static_cast<unsigned char>(kAlphabet[i])] = static_cast<std::int8_t>(i);
    return table;
}

const std::array<std::int8_t, 256> kReverseAlphabet = make_reverse_alphabet();

}  // namespace

ClientId derive_client_id(const sig::VerifyingKey& pk) {
    std::array<std::uint8_t, 32> value = pk.bytes();
    std::string text(kClientIdLength, '0');
    // repeated long division of the big-endian value by 62, least
    // significant digit first
    for (std::size_t pos = kClientIdLength; pos-- > 0;) {
        unsigned rem = 0;
        for (auto& byte : value) {
            unsigned acc = rem * 256u + byte;
            byte = static_cast<std::uint8_t>(acc / kBase);
            rem = acc % kBase;
        }
        text[pos] = kAlphabet[rem];
    }
    return ClientId{std::move(text)};
}

sig::VerifyingKey decode_client_id(std::string_view id) {
    if (id.size() != kClientIdLength)
        throw InvalidClientId(IdError::BadLength, "clientID must be 43 characters, got " +
                                                      std::to_string(id.size()));
    std::array<std::uint8_t, 32> value{};
    for (char c : id) {
        int digit = kReverseAlphabet[static_cast<unsigned char>(c)];
        if (digit < 0)
            throw InvalidClientId(IdError::BadAlphabet,
                                  "clientID contains character outside [0-9A-Za-z]");
        // value = value * 62 + digit, big-endian with carry out the top
        unsigned carry = static_cast<unsigned>(digit);
        for (std::size_t i = value.size(); i-- > 0;) {
            unsigned acc = value[i] * kBase + carry;
            value[i] = static_cast<std::uint8_t>(acc & 0xFF);
            carry = acc >> 8;
        }
        if (carry != 0)
            throw InvalidClientId(IdError::Overflow, "clientID decodes to a value >= 2^256");
    }
    auto pk = sig::VerifyingKey::from_bytes(ByteView(value.data(), value.size()));
    if (!pk.is_valid_point())
        throw InvalidClientId(IdError::NotACurvePoint,
                              "clientID does not decode to a usable public key");
    return pk;
}

bool is_well_formed(std::string_view id) {
    if (id.size() != kClientIdLength) return false;
    for (char c : id)
        if (kReverseAlphabet[static_cast<unsigned char>(c)] < 0) return false;
    return true;
}

}  // namespace smoker::identity
