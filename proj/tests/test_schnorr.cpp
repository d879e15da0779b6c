#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <deque>
#include <filesystem>

#include "smoker/schnorr.hpp"

using namespace smoker;
using namespace smoker::schnorr;

namespace {

const GroupParams kSmall{23, 11, 2};

// Direct modular arithmetic, independent of the module under test.
mpz_class raw_powm(const mpz_class& b, const mpz_class& e, const mpz_class& m) {
    mpz_class out;
    mpz_powm(out.get_mpz_t(), b.get_mpz_t(), e.get_mpz_t(), m.get_mpz_t());
    return out;
}

// The verification equation g^s = t * y^c (mod p), checked from scratch.
bool equation_holds(const GroupParams& g, const mpz_class& y, const Proof& proof,
                    const mpz_class& c) {
    return raw_powm(g.g, proof.s, g.p) == (proof.t * raw_powm(y, c, g.p)) % g.p;
}

Keypair make_keypair(const GroupParams& params, const mpz_class& x) {
    return Keypair{x, raw_powm(params.g, x, params.p)};
}

// Hands out scripted bytes, then fails loudly.
class ScriptedRandom final : public RandomSource {
public:
    explicit ScriptedRandom(Bytes script) : script_(script.begin(), script.end()) {}
    void fill(std::uint8_t* out, std::size_t n) override {
        REQUIRE(script_.size() >= n);
        for (std::size_t i = 0; i < n; i++) {
            out[i] = script_.front();
            script_.pop_front();
        }
    }

private:
    std::deque<std::uint8_t> script_;
};

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("group validation accepts the small test group") {
    auto validated = validate_group(kSmall, Strength::TestOnly);
    CHECK(validated == kSmall);
}

TEST_CASE("group validation rejects broken parameters") {
    SUBCASE("g = 1 generates the trivial group") {
        CHECK_THROWS_AS(validate_group(GroupParams{23, 11, 1}, Strength::TestOnly),
                        InvalidGroup);
        try {
            validate_group(GroupParams{23, 11, 1}, Strength::TestOnly);
        } catch (const InvalidGroup& e) {
            CHECK(e.kind == GroupError::BadGenerator);
        }
    }
    SUBCASE("p = 24 is composite") {
        try {
            validate_group(GroupParams{24, 11, 2}, Strength::TestOnly);
            FAIL("composite p accepted");
        } catch (const InvalidGroup& e) {
            CHECK(e.kind == GroupError::NotPrime);
        }
    }
    SUBCASE("q must divide p-1") {
        try {
            validate_group(GroupParams{23, 7, 2}, Strength::TestOnly);
            FAIL("order mismatch accepted");
        } catch (const InvalidGroup& e) {
            CHECK(e.kind == GroupError::OrderMismatch);
        }
    }
    SUBCASE("g outside the subgroup") {
        // 5^11 mod 23 = 22 != 1
        try {
            validate_group(GroupParams{23, 11, 5}, Strength::TestOnly);
            FAIL("non-subgroup generator accepted");
        } catch (const InvalidGroup& e) {
            CHECK(e.kind == GroupError::BadGenerator);
        }
    }
    SUBCASE("small group refused at production strength") {
        try {
            validate_group(kSmall, Strength::Production);
            FAIL("small group accepted in production");
        } catch (const InvalidGroup& e) {
            CHECK(e.kind == GroupError::TooWeak);
        }
    }
}

TEST_CASE("default group is a valid production-strength group") {
    const GroupParams& group = default_group();
    CHECK(mpz_sizeinbase(group.p.get_mpz_t(), 2) == 2048);
    CHECK(mpz_sizeinbase(group.q.get_mpz_t(), 2) == 256);
    CHECK_NOTHROW(validate_group(group, Strength::Production));
}

TEST_CASE("keygen") {
    SUBCASE("x forced to 7 gives y = 13") {
        // q = 11 needs 4 bits, so one masked byte is drawn per attempt
        ScriptedRandom rng(Bytes{0x07});
        Keypair kp = keygen(kSmall, rng);
        CHECK(kp.x == 7);
        CHECK(kp.y == 13);
        CHECK(kp.y == raw_powm(kSmall.g, 7, kSmall.p));
    }
    SUBCASE("x forced to 1 gives y = g") {
        ScriptedRandom rng(Bytes{0x01});
        Keypair kp = keygen(kSmall, rng);
        CHECK(kp.y == kSmall.g);
    }
    SUBCASE("1000 random keys stay in the subgroup") {
        SystemRandom rng;
        for (int i = 0; i < 1000; i++) {
            Keypair kp = keygen(kSmall, rng);
            CHECK(kp.x >= 1);
            CHECK(kp.x <= kSmall.q - 1);
            CHECK(raw_powm(kp.y, kSmall.q, kSmall.p) == 1);
        }
    }
}

TEST_CASE("challenge computation") {
    Bytes data = to_bytes("public data");
    mpz_class c1 = compute_challenge(kSmall, 8, 13, ByteView(data.data(), data.size()));
    mpz_class c2 = compute_challenge(kSmall, 8, 13, ByteView(data.data(), data.size()));
    CHECK(c1 == c2);
    CHECK(c1 >= 0);
    CHECK(c1 < kSmall.q);

    SUBCASE("flipping one bit of public data moves the challenge on the big group") {
        // on a 256-bit q a collision would mean a SHA-256 near-collision
        const GroupParams& group = default_group();
        SystemRandom rng;
        for (int i = 0; i < 100; i++) {
            Bytes pd = rng.bytes(24);
            mpz_class before = compute_challenge(group, 8, 13, ByteView(pd.data(), pd.size()));
            pd[i % pd.size()] ^= static_cast<std::uint8_t>(1u << (i % 8));
            mpz_class after = compute_challenge(group, 8, 13, ByteView(pd.data(), pd.size()));
            CHECK(before != after);
        }
    }
}

TEST_CASE("worked small-group vector: x=7, omega=3, c=5") {
    Keypair kp = make_keypair(kSmall, 7);
    CHECK(kp.y == 13);

    Bytes pd = to_bytes("vector");
    Proof proof = testhook::prove_with(kSmall, kp, ByteView(pd.data(), pd.size()), 3,
                                       mpz_class(5));
    CHECK(proof.t == 8);   // 2^3 mod 23
    CHECK(proof.s == 5);   // (3 + 7*5) mod 11

    // direct arithmetic oracle: 2^5 = 9 and 8 * 13^5 = 9 (mod 23)
    CHECK(raw_powm(2, 5, 23) == 9);
    CHECK((mpz_class(8) * raw_powm(13, 5, 23)) % 23 == 9);
    CHECK(equation_holds(kSmall, kp.y, proof, 5));
    CHECK(testhook::verify_with_challenge(kSmall, kp.y, proof, 5));

    SUBCASE("s+1 breaks the equation") {
        Proof bad = proof;
        bad.s = (bad.s + 1) % kSmall.q;
        CHECK(raw_powm(2, bad.s, 23) == 18);  // 2^6 mod 23
        CHECK_FALSE(equation_holds(kSmall, kp.y, bad, 5));
        CHECK_FALSE(testhook::verify_with_challenge(kSmall, kp.y, bad, 5));
    }
    SUBCASE("y = 1 is refused by policy") {
        Keypair degenerate = make_keypair(kSmall, 0);
        REQUIRE(degenerate.y == 1);
        Proof p0 = testhook::prove_with(kSmall, degenerate, ByteView(pd.data(), pd.size()), 3);
        CHECK_FALSE(verify(kSmall, degenerate.y, p0));
    }
}

TEST_CASE("prove/verify completeness on the small group") {
    SystemRandom rng;
    for (int i = 0; i < 1000; i++) {
        Keypair kp = keygen(kSmall, rng);
        Bytes pd = rng.bytes(16);
        Proof proof = prove(kSmall, kp, ByteView(pd.data(), pd.size()), rng);
        CHECK(verify(kSmall, kp.y, proof));
    }
}

TEST_CASE("fresh omega: repeated proofs differ in t") {
    SystemRandom rng;
    Keypair kp = keygen(kSmall, rng);
    Bytes pd = to_bytes("same data");
    int distinct = 0;
    Proof first = prove(kSmall, kp, ByteView(pd.data(), pd.size()), rng);
    for (int i = 0; i < 100; i++) {
        Proof other = prove(kSmall, kp, ByteView(pd.data(), pd.size()), rng);
        if (other.t != first.t) distinct++;
    }
    // t ranges over 10 possible commitments here, so most draws must differ
    CHECK(distinct > 50);
}

TEST_CASE("completeness and soundness on the 2048-bit group") {
    const GroupParams& group = default_group();
    SystemRandom rng;
    for (int i = 0; i < 40; i++) {
        Keypair kp = keygen(group, rng);
        Bytes pd = rng.bytes(32);
        Proof proof = prove(group, kp, ByteView(pd.data(), pd.size()), rng);
        REQUIRE(verify(group, kp.y, proof));

        Proof mutated = proof;
        switch (i % 3) {
            case 0:
                mutated.s = (mutated.s + 1) % group.q;
                break;
            case 1:
                mutated.t = (mutated.t * group.g) % group.p;  // stays in the subgroup
                break;
            case 2:
                mutated.public_data[0] ^= 0x01;
                break;
        }
        REQUIRE_FALSE(verify(group, kp.y, mutated));
    }
}

TEST_CASE("verify rejects out-of-range fields") {
    SystemRandom rng;
    Keypair kp = keygen(kSmall, rng);
    Bytes pd = to_bytes("x");
    Proof good = prove(kSmall, kp, ByteView(pd.data(), pd.size()), rng);
    REQUIRE(verify(kSmall, kp.y, good));

    Proof bad = good;
    bad.s = kSmall.q;  // s must be < q
    CHECK_FALSE(verify(kSmall, kp.y, bad));

    bad = good;
    bad.t = kSmall.p;  // t outside [1, p-1]
    CHECK_FALSE(verify(kSmall, kp.y, bad));

    bad = good;
    bad.t = 5;  // 5^11 mod 23 = 22, not in the subgroup
    CHECK_FALSE(verify(kSmall, kp.y, bad));

    CHECK_FALSE(verify(kSmall, kSmall.p + 13, good));  // y out of range
    CHECK_FALSE(verify(kSmall, 5, good));              // y outside the subgroup
}

TEST_CASE("minimal integer encoding") {
    CHECK(int_to_bytes(0).empty());
    CHECK(int_to_bytes(1) == Bytes{0x01});
    CHECK(int_to_bytes(256) == Bytes{0x01, 0x00});
    CHECK(bytes_to_int(Bytes{0x01, 0x00}) == 256);
    SystemRandom rng;
    for (int i = 0; i < 200; i++) {
        mpz_class v = random_scalar(default_group().q, rng);
        Bytes enc = int_to_bytes(v);
        CHECK(bytes_to_int(ByteView(enc.data(), enc.size())) == v);
        CHECK(enc[0] != 0);  // minimal: no leading zero byte
    }
}

TEST_CASE("group parameter file round trip") {
    const std::string path = temp_path("smoker_group_roundtrip.params");
    save_group_file(path, default_group());
    GroupParams loaded = load_group_file(path);
    CHECK(loaded == default_group());
    std::remove(path.c_str());
}

TEST_CASE("shipped group file matches the compiled-in constants") {
    GroupParams shipped = load_group_file(std::string(TEST_DATA_DIR) + "/../../data/group2048.params");
    CHECK(shipped == default_group());
}

TEST_CASE("test vector file") {
    auto vectors = load_test_vectors(std::string(TEST_DATA_DIR) + "/schnorr_vectors.tsv");
    REQUIRE(vectors.size() >= 6);
    int accepts = 0;
    for (const auto& v : vectors) {
        CHECK(verify(kSmall, v.y, v.proof) == v.expect_accept);
        // cross-check accepted lines against the raw equation
        if (v.expect_accept) {
            accepts++;
            mpz_class c = compute_challenge(kSmall, v.proof.t, v.y,
                                            ByteView(v.proof.public_data.data(),
                                                     v.proof.public_data.size()));
            CHECK(equation_holds(kSmall, v.y, v.proof, c));
        }
    }
    CHECK(accepts >= 3);

    SUBCASE("vector file writer round trips") {
        const std::string path = temp_path("smoker_vectors_roundtrip.tsv");
        save_test_vectors(path, vectors);
        auto reloaded = load_test_vectors(path);
        REQUIRE(reloaded.size() == vectors.size());
        for (std::size_t i = 0; i < vectors.size(); i++) {
            CHECK(reloaded[i].y == vectors[i].y);
            CHECK(reloaded[i].proof == vectors[i].proof);
            CHECK(reloaded[i].expect_accept == vectors[i].expect_accept);
        }
        std::remove(path.c_str());
    }
}
