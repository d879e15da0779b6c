/*
 * Copyright (c) the smoker authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <gmpxx.h>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "smoker/bytes.hpp"
#include "smoker/random.hpp"

namespace smoker::schnorr {

/// Finite-field group for the Schnorr identification scheme: q | p-1 and g
/// generates the order-q subgroup of Z_p*.
struct GroupParams {
    mpz_class p;
    mpz_class q;
    mpz_class g;

    bool operator==(const GroupParams&) const = default;
};

struct Keypair {
    mpz_class x;  // secret scalar in [1, q-1]
    mpz_class y;  // g^x mod p
};

/// Proof (t, s) bound to the public data that was hashed into the challenge.
struct Proof {
    mpz_class t;
    mpz_class s;
    Bytes public_data;

    bool operator==(const Proof&) const = default;
};

enum class GroupError {
    NotPrime,       // p or q fails primality
    OrderMismatch,  // q does not divide p-1
    BadGenerator,   // g == 1 or g^q != 1 mod p
    TooWeak,        // below production strength and test mode not requested
};

class InvalidGroup : public std::runtime_error {
public:
    InvalidGroup(GroupError kind, const std::string& what) : std::runtime_error(what), kind(kind) {}
    GroupError kind;
};

enum class Strength {
    Production,  // requires |q| >= 256 bits
    TestOnly,    // any mathematically valid group
};

/// Checks all group invariants (64-round probabilistic primality, subgroup
/// order, generator) and returns the parameters unchanged.
/// Throws InvalidGroup on the first violated invariant.
GroupParams validate_group(GroupParams params, Strength strength = Strength::Production);

/// The compiled-in 2048-bit group with a 256-bit prime-order subgroup.
/// The same parameters ship as data/group2048.params.
const GroupParams& default_group();

/// x uniform in [1, q-1], y = g^x mod p.
Keypair keygen(const GroupParams& params, RandomSource& rng);

/// c = SHA-256(enc(g) || enc(t) || enc(y) || enc(public_data)) mod q, where
/// every field is framed as a 4-byte big-endian length followed by its
/// minimal big-endian magnitude bytes (raw bytes for public_data).
mpz_class compute_challenge(const GroupParams& params, const mpz_class& t, const mpz_class& y,
                            ByteView public_data);

/// Fresh omega in [1, q-1]; t = g^omega, s = omega + x*c mod q.
Proof prove(const GroupParams& params, const Keypair& keypair, ByteView public_data,
            RandomSource& rng);

/// Recomputes the challenge from (g, t, y, public_data) and accepts iff
///   y in [2, p-1], y^q = 1, t in [1, p-1], t^q = 1, 0 <= s < q,
///   and g^s = t * y^c (mod p).
/// y = 1 is refused by policy: it corresponds to the degenerate secret x = 0.
bool verify(const GroupParams& params, const mpz_class& y, const Proof& proof);

// -- scalar/byte helpers ------------------------------------------------

/// Minimal big-endian magnitude encoding; 0 encodes to the empty string.
Bytes int_to_bytes(const mpz_class& v);
mpz_class bytes_to_int(ByteView data);

/// Uniform scalar in [1, q-1] by rejection sampling.
mpz_class random_scalar(const mpz_class& q, RandomSource& rng);

// -- file formats --------------------------------------------------------

/// Three lines: p=<hex>, q=<hex>, g=<hex>.
GroupParams load_group_file(const std::string& path);
void save_group_file(const std::string& path, const GroupParams& params);

/// One proof per line, tab-separated hex: y t s public_data expected,
/// where expected is the literal "accept" or "reject".
struct TestVector {
    mpz_class y;
    Proof proof;
    bool expect_accept = false;
};
std::vector<TestVector> load_test_vectors(const std::string& path);
void save_test_vectors(const std::string& path, const std::vector<TestVector>& vectors);

namespace testhook {

/// Prover with pinned randomness, optionally bypassing challenge computation.
/// Exists for worked test vectors only; the public API never accepts an
/// external challenge.
Proof prove_with(const GroupParams& params, const Keypair& keypair, ByteView public_data,
                 const mpz_class& omega, const std::optional<mpz_class>& forced_challenge = {});

/// Verification equation with a caller-supplied challenge, same range checks
/// as verify().
bool verify_with_challenge(const GroupParams& params, const mpz_class& y, const Proof& proof,
                           const mpz_class& c);

}  // namespace testhook

}  // namespace smoker::schnorr
