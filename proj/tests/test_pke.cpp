#include <gtest/gtest.h>

#include "mrk/pke.hpp"

using namespace mrk;

namespace {

const Params kDesk64 = Params::make(64, 4, 3, 16, /*strict=*/true);
const Params kToy8 = Params::make(8, 2, 1, 2, /*strict=*/false);

}  // namespace

TEST(Keygen, IsExactlyThePlantedSampler) {
  Rng a(uint64_t(0x21)), b(uint64_t(0x21));
  KeyPair kp = keygen(kToy8, a);
  PlantedInstance inst = sample_planted(kToy8, b);
  EXPECT_EQ(kp.pk.as, inst.as);
  EXPECT_EQ(kp.pk.y, inst.y);
  EXPECT_EQ(kp.sk.s, inst.witness->s);
}

TEST(Keygen, SecretKeyOpensPublicKey) {
  Rng rng(uint64_t(0x22));
  KeyPair kp = keygen(kDesk64, rng);
  EXPECT_TRUE(verify_solution(kp.pk.as, kp.pk.y, kDesk64.r, kp.sk.s));
}

TEST(Keygen, StrictParametersAreEnforced) {
  Rng rng(uint64_t(0x23));
  Params bad = Params::make(8, 2, 1, 2, /*strict=*/true);
  EXPECT_THROW(keygen(bad, rng), std::invalid_argument);
}

TEST(EncryptDecrypt, ZeroRoundTripsAtDesk64) {
  Rng rng(uint64_t(0x24));
  KeyPair kp = keygen(kDesk64, rng);
  for (int it = 0; it < 200; it++) {
    Ciphertext ct = encrypt(kp.pk, false, rng);
    ASSERT_EQ(ct.cs.size(), size_t(kDesk64.k) + 1);
    EXPECT_FALSE(decrypt(kp.sk, ct));
  }
}

TEST(EncryptDecrypt, OneRoundTripsAtDesk64) {
  Rng rng(uint64_t(0x25));
  KeyPair kp = keygen(kDesk64, rng);
  for (int it = 0; it < 200; it++) {
    Ciphertext ct = encrypt(kp.pk, true, rng);
    EXPECT_TRUE(decrypt(kp.sk, ct));
  }
}

// the decryption combination M = C_{k+1} + sum s_i C_i equals <R, E>_t by
// bilinearity, hence has rank at most r^2
TEST(EncryptDecrypt, CombinationCollapsesToBlockIpOfRAndE) {
  Rng rng(uint64_t(0x26));
  Params p = Params::make(16, 3, 2, 4, /*strict=*/false);
  BlockIpContext ctx(p.n, p.t);
  for (int it = 0; it < 30; it++) {
    PlantedInstance inst = sample_planted(p, rng);
    BitMatrix r = sample_rank_at_most(p.n, p.r, rng);
    std::vector<BitMatrix> cs;
    for (uint32_t i = 0; i < p.k; i++)
      cs.push_back(block_ip(ctx, r, inst.as[i]));
    cs.push_back(block_ip(ctx, r, inst.y));
    BitMatrix m = cs[p.k];
    for (uint32_t i = 0; i < p.k; i++)
      scale_accumulate(m, inst.witness->s.get(i), cs[i]);
    EXPECT_EQ(m, block_ip(ctx, r, inst.witness->e));
    EXPECT_LE(rank(m), p.r * p.r);
  }
}

TEST(EncryptDecrypt, WrongKeyReadsZeroCiphertextAsOne) {
  Rng rng(uint64_t(0x27));
  KeyPair kp = keygen(kDesk64, rng);
  SecretKey wrong = kp.sk;
  wrong.s.flip(0);
  int ones = 0;
  for (int it = 0; it < 50; it++) {
    Ciphertext ct = encrypt(kp.pk, false, rng);
    if (decrypt(wrong, ct)) ones++;
  }
  // with the wrong key the combination picks up <R, A_1>, which behaves
  // like a uniform t x t matrix, so rank stays above tau
  EXPECT_EQ(ones, 50);
}

TEST(EncryptDecrypt, ShapeMismatchThrows) {
  Rng rng(uint64_t(0x28));
  KeyPair kp = keygen(kToy8, rng);
  Ciphertext ct = encrypt(kp.pk, false, rng);

  Ciphertext wrong_k = ct;
  wrong_k.k = kToy8.k + 1;
  EXPECT_THROW(decrypt(kp.sk, wrong_k), std::invalid_argument);

  Ciphertext wrong_t = ct;
  wrong_t.t = kToy8.t * 2;
  EXPECT_THROW(decrypt(kp.sk, wrong_t), std::invalid_argument);

  Ciphertext short_ct = ct;
  short_ct.cs.pop_back();
  EXPECT_THROW(decrypt(kp.sk, short_ct), std::invalid_argument);
}

TEST(EncryptDecrypt, DeterministicPerSeed) {
  Rng k1(uint64_t(0x29));
  KeyPair kp = keygen(kToy8, k1);
  Rng e1(uint64_t(0x2a)), e2(uint64_t(0x2a));
  Ciphertext a = encrypt(kp.pk, false, e1);
  Ciphertext b = encrypt(kp.pk, false, e2);
  ASSERT_EQ(a.cs.size(), b.cs.size());
  for (size_t i = 0; i < a.cs.size(); i++) EXPECT_EQ(a.cs[i], b.cs[i]);
}

// toy8 has tau = 1 and t = 2, so bit 0 always decrypts correctly while a
// uniform 2x2 combination exceeds rank 1 only with probability 6/16; the
// small correctness margin is visible empirically.
TEST(EncryptDecrypt, Toy8ShowsNarrowMarginForBitOne) {
  Rng rng(uint64_t(0x2b));
  KeyPair kp = keygen(kToy8, rng);
  const int trials = 2000;
  int zero_ok = 0, one_ok = 0;
  for (int it = 0; it < trials; it++) {
    if (!decrypt(kp.sk, encrypt(kp.pk, false, rng))) zero_ok++;
    if (decrypt(kp.sk, encrypt(kp.pk, true, rng))) one_ok++;
  }
  EXPECT_EQ(zero_ok, trials);
  double freq = double(one_ok) / trials;
  EXPECT_NEAR(freq, 6.0 / 16.0, 0.05);
}

TEST(ToInstance, CarriesPublicDataOnly) {
  Rng rng(uint64_t(0x2c));
  KeyPair kp = keygen(kToy8, rng);
  PlantedInstance inst = to_instance(kp.pk);
  EXPECT_EQ(inst.as, kp.pk.as);
  EXPECT_EQ(inst.y, kp.pk.y);
  EXPECT_FALSE(inst.witness.has_value());
}
