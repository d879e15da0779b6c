/*
 * Copyright (c) the smoker authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "smoker/schnorr.hpp"

#include <fstream>
#include <sstream>

#include "smoker/sha256.hpp"

namespace smoker::schnorr {

namespace {

constexpr int kPrimalityRounds = 64;
constexpr std::size_t kProductionMinQBits = 256;

// 2048-bit p with 256-bit prime-order subgroup; see data/group2048.params.
constexpr const char* kDefaultP =
    "912f833db5b465003b111e6fcaeabbe4a7004f16d6a78d473f28d53a979a35c7"
    "374978b12bbb921921345a8ea4d55bd9c7abf40480eee4c3bdb728fdda9028d5"
    "23f3e61895fbc7575103b9e237219a59dd6bfdb5d767fb8dfa7e243ea620302f"
    "63539b19b66e7f350bdb74880338b8a5f45570558f356f0f610e799bfde34f3c"
    "91acf49f338f648b8324ad5a2f99a098ac50bf429521f4aa0e74b02e1326c1f0"
    "bca747127ad659b2ee2f5d3a8c00b52351f90a4bcd33bf19574336f98107b5cb"
    "920681727620ce94050b646b1f5b61e65c860798473dfbb24f27e292bd2a47fa"
    "f7a196186766582034c4990301c3acf2043f12901ae2869ed954857fb7b0c979";
constexpr const char* kDefaultQ =
    "e872f35879774f5b41df6e0826debd4920e0d4d0593c7d256eae52ecb4fe4d9f";
constexpr const char* kDefaultG =
    "254fad2caa76dc260e0392829bd28c38afc43909ea71734b8445eb7f3db94681"
    "6fec1890f6ac60a3f095fbd8fa09e909b7931e37f495be178920d76e4fad2050"
    "9e9d7ac4ec31e8225e561fdaf8802726cb30fd11077fae05a7398fbef096e533"
    "be2d8b46706a3d19405f72f856aeb9344b9102d4781480978ad408c2d1850a25"
    "8722775294c918c2382de36ad8a8679f562312ecc00762a532b297b23a628010"
    "dac82fc03fe011886645d2fb13435670f559d884f569a15a621b9591ddf4107c"
    "d8976001fe8d8056d44fbc5d83eaac0a983f3ceb9c9ee9d74de40160b6cf9c8d"
    "7097d0d92e0ba0de9dca6f966d6ecc7dd9c79b691b3eb14bd1a1b71620196635";

mpz_class powm(const mpz_class& base, const mpz_class& exp, const mpz_class& mod) {
    mpz_class out;
    mpz_powm(out.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
    return out;
}

bool probably_prime(const mpz_class& n) {
    return mpz_probab_prime_p(n.get_mpz_t(), kPrimalityRounds) != 0;
}

bool in_subgroup(const mpz_class& v, const GroupParams& params) {
    return v >= 1 && v < params.p && powm(v, params.q, params.p) == 1;
}

void append_framed(Bytes& out, ByteView field) {
    const auto n = static_cast<std::uint32_t>(field.size());
    out.push_back(static_cast<std::uint8_t>(n >> 24));
    out.push_back(static_cast<std::uint8_t>(n >> 16));
    out.push_back(static_cast<std::uint8_t>(n >> 8));
    out.push_back(static_cast<std::uint8_t>(n));
    append(out, field);
}

std::string to_lower_hex(const mpz_class& v) {
    char* raw = mpz_get_str(nullptr, 16, v.get_mpz_t());
    std::string out(raw);
    void (*freefn)(void*, size_t);
    mp_get_memory_functions(nullptr, nullptr, &freefn);
    freefn(raw, out.size() + 1);
    return out;
}

mpz_class from_hex_str(const std::string& hex) {
    if (hex.empty()) throw std::runtime_error("empty hex integer field");
    return mpz_class(hex, 16);
}

}  // namespace

GroupParams validate_group(GroupParams params, Strength strength) {
    if (!probably_prime(params.p))
        throw InvalidGroup(GroupError::NotPrime, "p fails primality test");
    if (!probably_prime(params.q))
        throw InvalidGroup(GroupError::NotPrime, "q fails primality test");
    mpz_class pm1 = params.p - 1;
    if (pm1 % params.q != 0)
        throw InvalidGroup(GroupError::OrderMismatch, "q does not divide p-1");
    if (params.g <= 1 || params.g >= params.p)
        throw InvalidGroup(GroupError::BadGenerator, "g outside [2, p-1]");
    if (powm(params.g, params.q, params.p) != 1)
        throw InvalidGroup(GroupError::BadGenerator, "g^q != 1 mod p");
    if (strength == Strength::Production &&
        mpz_sizeinbase(params.q.get_mpz_t(), 2) < kProductionMinQBits)
        throw InvalidGroup(GroupError::TooWeak, "subgroup order below 256 bits");
    return params;
}

const GroupParams& default_group() {
    static const GroupParams group = validate_group(
        GroupParams{mpz_class(kDefaultP, 16), mpz_class(kDefaultQ, 16), mpz_class(kDefaultG, 16)},
        Strength::Production);
    return group;
}

Bytes int_to_bytes(const mpz_class& v) {
    if (v == 0) return {};
    std::size_t count = 0;
    Bytes out((mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8);
    mpz_export(out.data(), &count, 1, 1, 1, 0, v.get_mpz_t());
    out.resize(count);
    return out;
}

mpz_class bytes_to_int(ByteView data) {
    mpz_class out;
    if (!data.empty()) mpz_import(out.get_mpz_t(), data.size(), 1, 1, 1, 0, data.data());
    return out;
}

mpz_class random_scalar(const mpz_class& q, RandomSource& rng) {
    const std::size_t bits = mpz_sizeinbase(q.get_mpz_t(), 2);
    const std::size_t nbytes = (bits + 7) / 8;
    const unsigned top_mask = bits % 8 == 0 ? 0xFF : (1u << (bits % 8)) - 1;
    Bytes buf(nbytes);
    for (;;) {
        rng.fill(buf.data(), buf.size());
        buf[0] &= static_cast<std::uint8_t>(top_mask);
        mpz_class v = bytes_to_int(buf);
        if (v >= 1 && v < q) return v;
    }
}

Keypair keygen(const GroupParams& params, RandomSource& rng) {
    Keypair kp;
    kp.x = random_scalar(params.q, rng);
    kp.y = powm(params.g, kp.x, params.p);
    return kp;
}

mpz_class compute_challenge(const GroupParams& params, const mpz_class& t, const mpz_class& y,
                            ByteView public_data) {
    Bytes input;
    append_framed(input, int_to_bytes(params.g));
    append_framed(input, int_to_bytes(t));
    append_framed(input, int_to_bytes(y));
    append_framed(input, public_data);
    Digest digest = sha256(input);
    return bytes_to_int(digest) % params.q;
}

Proof prove(const GroupParams& params, const Keypair& keypair, ByteView public_data,
            RandomSource& rng) {
    mpz_class omega = random_scalar(params.q, rng);
    return testhook::prove_with(params, keypair, public_data, omega);
}

bool verify(const GroupParams& params, const mpz_class& y, const Proof& proof) {
    mpz_class c = compute_challenge(params, proof.t, y, proof.public_data);
    return testhook::verify_with_challenge(params, y, proof, c);
}

namespace testhook {

Proof prove_with(const GroupParams& params, const Keypair& keypair, ByteView public_data,
                 const mpz_class& omega, const std::optional<mpz_class>& forced_challenge) {
    Proof proof;
    proof.t = powm(params.g, omega, params.p);
    proof.public_data.assign(public_data.begin(), public_data.end());
    mpz_class c = forced_challenge ? *forced_challenge
                                   : compute_challenge(params, proof.t, keypair.y, public_data);
    proof.s = (omega + keypair.x * c) % params.q;
    return proof;
}

bool verify_with_challenge(const GroupParams& params, const mpz_class& y, const Proof& proof,
                           const mpz_class& c) {
    if (y <= 1 || y >= params.p) return false;  // y = 1 refused: degenerate x = 0
    if (!in_subgroup(y, params)) return false;
    if (!in_subgroup(proof.t, params)) return false;
    if (proof.s < 0 || proof.s >= params.q) return false;
    mpz_class lhs = powm(params.g, proof.s, params.p);
    mpz_class rhs = (powm(y, c, params.p) * proof.t) % params.p;
    return lhs == rhs;
}

}  // namespace testhook

GroupParams load_group_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open group file: " + path);
    GroupParams params;
    bool have_p = false, have_q = false, have_g = false;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (line.rfind("p=", 0) == 0) {
            params.p = from_hex_str(line.substr(2));
            have_p = true;
        } else if (line.rfind("q=", 0) == 0) {
            params.q = from_hex_str(line.substr(2));
            have_q = true;
        } else if (line.rfind("g=", 0) == 0) {
            params.g = from_hex_str(line.substr(2));
            have_g = true;
        } else {
            throw std::runtime_error("unrecognized line in group file: " + line);
        }
    }
    if (!have_p || !have_q || !have_g)
        throw std::runtime_error("group file missing p, q, or g: " + path);
    return params;
}

void save_group_file(const std::string& path, const GroupParams& params) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write group file: " + path);
    out << "p=" << to_lower_hex(params.p) << "\n";
    out << "q=" << to_lower_hex(params.q) << "\n";
    out << "g=" << to_lower_hex(params.g) << "\n";
}

std::vector<TestVector> load_test_vectors(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open vector file: " + path);
    std::vector<TestVector> vectors;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (;;) {
            std::size_t tab = line.find('\t', start);
            fields.push_back(line.substr(start, tab == std::string::npos ? tab : tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (fields.size() != 5)
            throw std::runtime_error("vector line " + std::to_string(lineno) +
                                     ": expected 5 tab-separated fields");
        TestVector v;
        v.y = from_hex_str(fields[0]);
        v.proof.t = from_hex_str(fields[1]);
        v.proof.s = from_hex_str(fields[2]);
        v.proof.public_data = from_hex(fields[3]);
        if (fields[4] == "accept")
            v.expect_accept = true;
        else if (fields[4] == "reject")
            v.expect_accept = false;
        else
            throw std::runtime_error("vector line " + std::to_string(lineno) +
                                     ": expected accept or reject");
        vectors.push_back(std::move(v));
    }
    return vectors;
}

void save_test_vectors(const std::string& path, const std::vector<TestVector>& vectors) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write vector file: " + path);
    for (const auto& v : vectors) {
        out << to_lower_hex(v.y) << '\t' << to_lower_hex(v.proof.t) << '\t'
            << to_lower_hex(v.proof.s) << '\t' << to_hex(v.proof.public_data) << '\t'
            << (v.expect_accept ? "accept" : "reject") << "\n";
    }
}

}  // namespace smoker::schnorr
