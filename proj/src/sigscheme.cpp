/*
 * Copyright (c) the smoker authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "smoker/sigscheme.hpp"

#include <sodium.h>
#include <sys/stat.h>

#include <atomic>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "smoker/sha256.hpp"

namespace smoker::sig {

namespace {

std::atomic<std::uint64_t> g_key_derivations{0};
std::atomic<std::uint64_t> g_signatures{0};
std::atomic<std::uint64_t> g_verifications{0};

}  // namespace

VerifyingKey VerifyingKey::from_bytes(ByteView pk) {
    if (pk.size() != kPublicKeyBytes)
        throw std::invalid_argument("public key must be 32 bytes, got " +
                                    std::to_string(pk.size()));
    VerifyingKey out;
    std::memcpy(out.pk_.data(), pk.data(), kPublicKeyBytes);
    return out;
}

bool VerifyingKey::is_valid_point() const {
    ensure_crypto_init();
    return crypto_core_ed25519_is_valid_point(pk_.data()) == 1;
}

SigningKey SigningKey::generate(RandomSource& rng) {
    auto seed = rng.array<kSeedBytes>();
    return from_seed(ByteView(seed.data(), seed.size()));
}

SigningKey SigningKey::from_seed(ByteView seed) {
    if (seed.size() != kSeedBytes)
        throw std::invalid_argument("signing key seed must be 32 bytes, got " +
                                    std::to_string(seed.size()));
    ensure_crypto_init();
    SigningKey out;
    std::memcpy(out.seed_.data(), seed.data(), kSeedBytes);
    std::array<std::uint8_t, kPublicKeyBytes> pk;
    crypto_sign_seed_keypair(pk.data(), out.expanded_.data(), out.seed_.data());
    g_key_derivations.fetch_add(1, std::memory_order_relaxed);
    out.pk_ = VerifyingKey::from_bytes(ByteView(pk.data(), pk.size()));
    return out;
}

SigningKey SigningKey::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open key file: " + path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.rfind("sk=", 0) != 0)
            throw std::runtime_error("key file line must start with sk=: " + path);
        Bytes seed = from_hex(line.substr(3));
        if (seed.size() != kSeedBytes)
            throw std::runtime_error("key file sk must be 64 hex chars: " + path);
        return from_seed(seed);
    }
    throw std::runtime_error("key file contains no sk line: " + path);
}

void SigningKey::save_file(const std::string& path) const {
    {
        std::ofstream out(path, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write key file: " + path);
        out << "sk=" << to_hex(ByteView(seed_.data(), seed_.size())) << "\n";
    }
    ::chmod(path.c_str(), S_IRUSR | S_IWUSR);
}

Bytes sign_blob(const SigningKey& sk, ByteView m) {
    ensure_crypto_init();
    Bytes blob(kSignatureBytes + m.size());
    unsigned long long blob_len = 0;
    crypto_sign(blob.data(), &blob_len, m.data(), m.size(), sk.expanded_.data());
    g_signatures.fetch_add(1, std::memory_order_relaxed);
    blob.resize(blob_len);
    return blob;
}

SignedMessage sign(const SigningKey& sk, ByteView m) { return SignedMessage{sign_blob(sk, m)}; }

std::optional<Bytes> verify(const VerifyingKey& pk, ByteView blob) {
    if (blob.size() < kSignatureBytes) throw MalformedBlob(blob.size());
    ensure_crypto_init();
    g_verifications.fetch_add(1, std::memory_order_relaxed);
    Bytes message(std::max<std::size_t>(blob.size() - kSignatureBytes, 1));
    unsigned long long mlen = 0;
    if (crypto_sign_open(message.data(), &mlen, blob.data(), blob.size(), pk.bytes().data()) != 0)
        return std::nullopt;
    message.resize(mlen);
    return message;
}

OpCounts op_counts() {
    return OpCounts{g_key_derivations.load(), g_signatures.load(), g_verifications.load()};
}

void reset_op_counts() {
    g_key_derivations = 0;
    g_signatures = 0;
    g_verifications = 0;
}

}  // namespace smoker::sig
