/*
 * Copyright (c) the smoker authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "smoker/bytes.hpp"
#include "smoker/random.hpp"

namespace smoker::sig {

inline constexpr std::size_t kSeedBytes = 32;
inline constexpr std::size_t kPublicKeyBytes = 32;
inline constexpr std::size_t kSignatureBytes = 64;

/// Raised when a signed blob is too short to even contain a signature.
/// Kept distinct from failed verification so callers can log protocol
/// errors separately from bad proofs.
class MalformedBlob : public std::runtime_error {
public:
    explicit MalformedBlob(std::size_t size)
        : std::runtime_error("signed blob of " + std::to_string(size) +
                             " bytes is shorter than a signature") {}
};

class VerifyingKey {
public:
    VerifyingKey() = default;
    /// Throws std::invalid_argument unless pk is exactly 32 bytes.
    static VerifyingKey from_bytes(ByteView pk);

    const std::array<std::uint8_t, kPublicKeyBytes>& bytes() const { return pk_; }
    ByteView view() const { return ByteView(pk_.data(), pk_.size()); }

    /// True iff the key decodes to a canonical point on the main subgroup.
    bool is_valid_point() const;

    bool operator==(const VerifyingKey&) const = default;

private:
    std::array<std::uint8_t, kPublicKeyBytes> pk_{};
};

/// Ed25519 signing key. Holds the 32-byte seed plus the expanded secret key
/// cached at construction so signing costs a single curve operation.
/// Neither form is ever written into a wire packet.
class SigningKey {
public:
    static SigningKey generate(RandomSource& rng);
    /// Throws std::invalid_argument unless seed is exactly 32 bytes.
    static SigningKey from_seed(ByteView seed);

    /// Key file format: a single line "sk=<64 hex chars>".
    static SigningKey load_file(const std::string& path);
    /// Writes the key file with mode 0600.
    void save_file(const std::string& path) const;

    const std::array<std::uint8_t, kSeedBytes>& seed() const { return seed_; }
    const VerifyingKey& verifying_key() const { return pk_; }

private:
    SigningKey() = default;
    std::array<std::uint8_t, kSeedBytes> seed_{};
    std::array<std::uint8_t, 64> expanded_{};
    VerifyingKey pk_;
    friend Bytes sign_blob(const SigningKey&, ByteView);
};

/// Signature-first wire layout: blob = s || m, |s| = 64.
struct SignedMessage {
    Bytes blob;

    ByteView signature() const { return ByteView(blob.data(), kSignatureBytes); }
    ByteView message() const {
        return ByteView(blob.data() + kSignatureBytes, blob.size() - kSignatureBytes);
    }
    bool operator==(const SignedMessage&) const = default;
};

/// Deterministic signature over m, prepended to m.
SignedMessage sign(const SigningKey& sk, ByteView m);

/// Splits blob into (s, m) and returns m iff s verifies over m under pk;
/// returns nullopt otherwise. Throws MalformedBlob when |blob| < 64.
std::optional<Bytes> verify(const VerifyingKey& pk, ByteView blob);

/// Curve-operation counters, used to check the per-connection cost claim.
struct OpCounts {
    std::uint64_t key_derivations = 0;
    std::uint64_t signatures = 0;
    std::uint64_t verifications = 0;
};
OpCounts op_counts();
void reset_op_counts();

}  // namespace smoker::sig
