/*
 * Copyright (c) the smoker authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "smoker/sigscheme.hpp"

namespace smoker::identity {

/// 2^256 key values need 43 base62 digits (62^43 > 2^256 > 62^42).
inline constexpr std::size_t kClientIdLength = 43;
inline constexpr std::string_view kAlphabet =
    "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";

enum class IdError {
    BadLength,
    BadAlphabet,
    Overflow,        // decoded value >= 2^256
    NotACurvePoint,  // no proof could ever verify under this key
};

class InvalidClientId : public std::runtime_error {
public:
    InvalidClientId(IdError kind, const std::string& what) : std::runtime_error(what), kind(kind) {}
    IdError kind;
};

/// Fixed-width base62 rendering of a 32-byte public key; always 43
/// characters, zero-padded on the left.
struct ClientId {
    std::string text;

    bool operator==(const ClientId&) const = default;
};

/// Interprets pk as a big-endian 256-bit integer and renders it in base 62.
ClientId derive_client_id(const sig::VerifyingKey& pk);

/// Exact inverse of derive_client_id. Throws InvalidClientId when the string
/// breaks any ClientId invariant or the decoded bytes are not a usable
/// public key.
sig::VerifyingKey decode_client_id(std::string_view id);

/// Cheap syntactic test (length and alphabet only, no curve check).
bool is_well_formed(std::string_view id);

}  // namespace smoker::identity
