#include "mrk/f2mat.hpp"
#include "mrk/stattest.hpp"

#include <gtest/gtest.h>

#include <map>
#include <set>

using namespace mrk;

// ---------- independent oracles (kept deliberately naive) ----------

namespace {

BitMatrix mul_oracle(const BitMatrix& a, const BitMatrix& b) {
  BitMatrix c(a.rows(), b.cols());
  for (uint32_t i = 0; i < a.rows(); i++)
    for (uint32_t j = 0; j < b.cols(); j++) {
      bool s = false;
      for (uint32_t k = 0; k < a.cols(); k++) s ^= a.get(i, k) && b.get(k, j);
      c.set(i, j, s);
    }
  return c;
}

uint32_t rank_oracle(const BitMatrix& m) {
  std::vector<std::vector<bool>> a(m.rows(), std::vector<bool>(m.cols()));
  for (uint32_t r = 0; r < m.rows(); r++)
    for (uint32_t c = 0; c < m.cols(); c++) a[r][c] = m.get(r, c);
  uint32_t rk = 0;
  for (uint32_t c = 0; c < m.cols() && rk < m.rows(); c++) {
    uint32_t p = rk;
    while (p < m.rows() && !a[p][c]) p++;
    if (p == m.rows()) continue;
    std::swap(a[p], a[rk]);
    for (uint32_t i = 0; i < m.rows(); i++)
      if (i != rk && a[i][c])
        for (uint32_t j = 0; j < m.cols(); j++) a[i][j] = a[i][j] ^ a[rk][j];
    rk++;
  }
  return rk;
}

BitMatrix kron_oracle(const BitMatrix& a, const BitMatrix& b) {
  BitMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (uint32_t i1 = 0; i1 < a.rows(); i1++)
    for (uint32_t j1 = 0; j1 < a.cols(); j1++)
      for (uint32_t i2 = 0; i2 < b.rows(); i2++)
        for (uint32_t j2 = 0; j2 < b.cols(); j2++)
          out.set(i1 * b.rows() + i2, j1 * b.cols() + j2,
                  a.get(i1, j1) && b.get(i2, j2));
  return out;
}

uint64_t matrix_key(const BitMatrix& m) {
  // pack a tiny matrix into an integer for histogram keys (n <= 8)
  uint64_t k = 0;
  for (uint32_t r = 0; r < m.rows(); r++)
    for (uint32_t c = 0; c < m.cols(); c++) k = k << 1 | uint64_t(m.get(r, c));
  return k;
}

BitMatrix matrix_from_key(uint64_t key, uint32_t n) {
  BitMatrix m(n, n);
  for (int i = int(n * n) - 1; i >= 0; i--) {
    m.set(uint32_t(i) / n, uint32_t(i) % n, key & 1);
    key >>= 1;
  }
  return m;
}

}  // namespace

// ---------- frozen examples ----------

TEST(F2Mat, MulFrozenExample) {
  BitMatrix a = BitMatrix::from_rows({"11", "01"});
  BitMatrix b = BitMatrix::from_rows({"10", "11"});
  BitMatrix expect = BitMatrix::from_rows({"01", "11"});
  EXPECT_EQ(mul(a, b), expect);
  EXPECT_EQ(mul_oracle(a, b), expect);
}

TEST(F2Mat, RankFrozenExamples) {
  EXPECT_EQ(rank(BitMatrix::identity(3)), 3u);
  EXPECT_EQ(rank(BitMatrix(4, 7)), 0u);
  // third row is the sum of the first two
  BitMatrix m = BitMatrix::from_rows({"1100", "0110", "1010"});
  EXPECT_EQ(rank(m), 2u);
}

TEST(F2Mat, IdentityAndZeroBehave) {
  Rng rng(7);
  BitMatrix a = sample_uniform(9, 9, rng);
  EXPECT_EQ(mul(BitMatrix::identity(9), a), a);
  EXPECT_EQ(mul(a, BitMatrix::identity(9)), a);
  EXPECT_EQ(add(a, a), BitMatrix(9, 9));
  EXPECT_TRUE(add(a, a).is_zero());
}

// ---------- randomized equivalence against oracles ----------

TEST(F2Mat, MulMatchesSchoolbook) {
  Rng rng(1);
  for (int it = 0; it < 300; it++) {
    uint32_t n = 1 + uint32_t(rng.below(32));
    uint32_t m = 1 + uint32_t(rng.below(32));
    uint32_t p = 1 + uint32_t(rng.below(32));
    BitMatrix a = sample_uniform(n, m, rng);
    BitMatrix b = sample_uniform(m, p, rng);
    ASSERT_EQ(mul(a, b), mul_oracle(a, b));
  }
}

TEST(F2Mat, MulAssociatesAndDistributes) {
  Rng rng(2);
  for (int it = 0; it < 50; it++) {
    BitMatrix a = sample_uniform(6, 5, rng);
    BitMatrix b = sample_uniform(5, 7, rng);
    BitMatrix c = sample_uniform(7, 4, rng);
    ASSERT_EQ(mul(mul(a, b), c), mul(a, mul(b, c)));
    BitMatrix b2 = sample_uniform(5, 7, rng);
    ASSERT_EQ(mul(a, add(b, b2)), add(mul(a, b), mul(a, b2)));
  }
}

TEST(F2Mat, RankMatchesOracleAndTranspose) {
  Rng rng(3);
  for (int it = 0; it < 200; it++) {
    uint32_t n = 1 + uint32_t(rng.below(24));
    uint32_t m = 1 + uint32_t(rng.below(24));
    BitMatrix a = sample_uniform(n, m, rng);
    uint32_t rk = rank(a);
    ASSERT_EQ(rk, rank_oracle(a));
    ASSERT_EQ(rk, rank(transpose(a)));
  }
}

TEST(F2Mat, RrefShape) {
  Rng rng(4);
  for (int it = 0; it < 100; it++) {
    BitMatrix a = sample_uniform(1 + uint32_t(rng.below(12)),
                                 1 + uint32_t(rng.below(12)), rng);
    RrefResult rr = rref(a);
    ASSERT_EQ(uint32_t(rr.pivots.size()), rank(a));
    // pivots strictly increasing, pivot columns are unit columns
    for (size_t i = 0; i < rr.pivots.size(); i++) {
      if (i) ASSERT_LT(rr.pivots[i - 1], rr.pivots[i]);
      for (uint32_t r = 0; r < a.rows(); r++)
        ASSERT_EQ(rr.mat.get(r, rr.pivots[i]), r == i);
    }
    // rref is idempotent
    ASSERT_EQ(rref(rr.mat).mat, rr.mat);
  }
}

TEST(F2Mat, KernelBasisSpansKernel) {
  Rng rng(5);
  for (int it = 0; it < 100; it++) {
    uint32_t n = 1 + uint32_t(rng.below(12));
    uint32_t m = 1 + uint32_t(rng.below(12));
    BitMatrix a = sample_uniform(n, m, rng);
    auto basis = kernel_basis(a);
    ASSERT_EQ(basis.size() + rank(a), m);
    for (const auto& v : basis) ASSERT_TRUE(mul(a, v).is_zero());
    // basis vectors are independent: stack them as rows and check rank
    if (!basis.empty()) {
      BitMatrix stacked(uint32_t(basis.size()), m);
      for (uint32_t i = 0; i < basis.size(); i++) stacked.set_row(i, basis[i]);
      ASSERT_EQ(rank(stacked), uint32_t(basis.size()));
    }
  }
}

TEST(F2Mat, KernelOfFullRankSquareIsEmpty) {
  Rng rng(6);
  BitMatrix a = detail::sample_full_rank(8, 8, rng);
  EXPECT_TRUE(kernel_basis(a).empty());
}

TEST(F2Mat, SolveRoundTripAndConsistencyDetection) {
  Rng rng(8);
  for (int it = 0; it < 200; it++) {
    uint32_t n = 1 + uint32_t(rng.below(10));
    uint32_t m = 1 + uint32_t(rng.below(10));
    BitMatrix a = sample_uniform(n, m, rng);
    if (it % 2 == 0) {
      BitVector x0 = sample_uniform_vector(m, rng);
      BitVector b = mul(a, x0);
      auto x = solve(a, b);
      ASSERT_TRUE(x.has_value());
      ASSERT_EQ(mul(a, *x), b);
    } else {
      BitVector b = sample_uniform_vector(n, rng);
      auto x = solve(a, b);
      // oracle: consistent iff augmenting b does not raise the rank
      BitMatrix aug(n, m + 1);
      for (uint32_t r = 0; r < n; r++) {
        for (uint32_t c = 0; c < m; c++) aug.set(r, c, a.get(r, c));
        aug.set(r, m, b.get(r));
      }
      bool consistent = rank(aug) == rank(a);
      ASSERT_EQ(x.has_value(), consistent);
      if (x) ASSERT_EQ(mul(a, *x), b);
    }
  }
}

// ---------- vec / kron / trace identities ----------

TEST(F2Mat, VecIsColumnStacking) {
  // 2x2 example: vec(A) = (a11, a21, a12, a22)
  BitMatrix a = BitMatrix::from_rows({"10", "01"});
  BitVector v = vec(a);
  ASSERT_EQ(v.size(), 4u);
  EXPECT_TRUE(v.get(0));   // a11
  EXPECT_FALSE(v.get(1));  // a21
  EXPECT_FALSE(v.get(2));  // a12
  EXPECT_TRUE(v.get(3));   // a22
  EXPECT_EQ(unvec(v, 2, 2), a);
}

TEST(F2Mat, KronMatchesOracle) {
  Rng rng(9);
  for (int it = 0; it < 60; it++) {
    BitMatrix a = sample_uniform(1 + uint32_t(rng.below(6)),
                                 1 + uint32_t(rng.below(6)), rng);
    BitMatrix b = sample_uniform(1 + uint32_t(rng.below(9)),
                                 1 + uint32_t(rng.below(9)), rng);
    ASSERT_EQ(kron(a, b), kron_oracle(a, b));
  }
}

TEST(F2Mat, KronRankIsMultiplicative) {
  Rng rng(10);
  for (int it = 0; it < 80; it++) {
    BitMatrix a = sample_uniform(1 + uint32_t(rng.below(7)),
                                 1 + uint32_t(rng.below(7)), rng);
    BitMatrix b = sample_uniform(1 + uint32_t(rng.below(7)),
                                 1 + uint32_t(rng.below(7)), rng);
    ASSERT_EQ(rank(kron(a, b)), rank(a) * rank(b));
  }
}

TEST(F2Mat, VecOfProductIdentity) {
  // vec(A X B) = (B^T kron A) vec(X)
  Rng rng(11);
  for (int it = 0; it < 60; it++) {
    uint32_t n = 1 + uint32_t(rng.below(5));
    uint32_t m = 1 + uint32_t(rng.below(5));
    uint32_t p = 1 + uint32_t(rng.below(5));
    uint32_t q = 1 + uint32_t(rng.below(5));
    BitMatrix a = sample_uniform(n, m, rng);
    BitMatrix x = sample_uniform(m, p, rng);
    BitMatrix b = sample_uniform(p, q, rng);
    BitVector lhs = vec(mul(mul(a, x), b));
    BitVector rhs = mul(kron(transpose(b), a), vec(x));
    ASSERT_EQ(lhs, rhs);
  }
}

TEST(F2Mat, TraceIdentity) {
  // Tr(A^T C) = <vec(A), vec(C)>
  Rng rng(12);
  for (int it = 0; it < 80; it++) {
    uint32_t n = 1 + uint32_t(rng.below(8));
    uint32_t m = 1 + uint32_t(rng.below(8));
    BitMatrix a = sample_uniform(n, m, rng);
    BitMatrix c = sample_uniform(n, m, rng);
    ASSERT_EQ(trace(mul(transpose(a), c)), dot(vec(a), vec(c)));
    ASSERT_EQ(frobenius_ip(a, c), dot(vec(a), vec(c)));
  }
}

TEST(F2Mat, FrobeniusSelfIsParityOfOnes) {
  Rng rng(13);
  for (int it = 0; it < 40; it++) {
    BitMatrix a = sample_uniform(6, 11, rng);
    ASSERT_EQ(frobenius_ip(a, a), (a.popcount() & 1) != 0);
  }
}

// ---------- window and helpers ----------

TEST(F2Mat, Window64MatchesBitLoop) {
  Rng rng(14);
  for (int it = 0; it < 200; it++) {
    uint32_t cols = 65 + uint32_t(rng.below(120));
    BitMatrix a = sample_uniform(3, cols, rng);
    uint32_t len = 1 + uint32_t(rng.below(64));
    uint32_t c0 = uint32_t(rng.below(cols));
    uint64_t got = a.window64(1, c0, len);
    uint64_t want = 0;
    for (uint32_t i = 0; i < len && c0 + i < cols; i++)
      want |= uint64_t(a.get(1, c0 + i)) << i;
    ASSERT_EQ(got, want);
  }
}

TEST(F2Mat, DimensionMismatchThrows) {
  BitMatrix a(2, 3), b(4, 2);
  EXPECT_THROW(add(a, b), std::invalid_argument);
  EXPECT_THROW(mul(a, b), std::invalid_argument);
  EXPECT_THROW(frobenius_ip(a, b), std::invalid_argument);
  EXPECT_THROW(trace(a), std::invalid_argument);
  EXPECT_THROW(BitMatrix(kMaxDim + 1, 1), std::invalid_argument);
}

// ---------- exact rank counting ----------

TEST(F2Mat, CountRankFrozenValues) {
  EXPECT_EQ(count_rank_exact(2, 0), cpp_int(1));
  EXPECT_EQ(count_rank_exact(2, 1), cpp_int(9));
  EXPECT_EQ(count_rank_exact(2, 2), cpp_int(6));
  EXPECT_EQ(count_rank_exact(3, 1), cpp_int(49));
}

TEST(F2Mat, CountRankMatchesEnumeration) {
  for (uint32_t n = 1; n <= 3; n++) {
    std::vector<uint64_t> byrank(n + 1, 0);
    uint64_t total = uint64_t(1) << (n * n);
    for (uint64_t key = 0; key < total; key++)
      byrank[rank(matrix_from_key(key, n))]++;
    cpp_int sum = 0;
    for (uint32_t rho = 0; rho <= n; rho++) {
      EXPECT_EQ(count_rank_exact(n, rho), cpp_int(byrank[rho]))
          << "n=" << n << " rho=" << rho;
      sum += count_rank_exact(n, rho);
    }
    EXPECT_EQ(sum, cpp_int(1) << (n * n));
  }
}

// ---------- samplers ----------

TEST(F2Mat, SampleRankAtMostRespectsBound) {
  Rng rng(15);
  for (int it = 0; it < 400; it++) {
    uint32_t n = 1 + uint32_t(rng.below(6));
    uint32_t r = uint32_t(rng.below(n + 1));
    ASSERT_LE(rank(sample_rank_at_most(n, r, rng)), r);
  }
  EXPECT_TRUE(sample_rank_at_most(5, 0, rng).is_zero());
}

TEST(F2Mat, SampleRankAtMostIsUniformOnSupport) {
  // n=2, r=1: support = zero matrix + nine rank-1 matrices
  Rng rng(16);
  const uint64_t draws = 40000;
  std::map<uint64_t, uint64_t> hist;
  for (uint64_t i = 0; i < draws; i++)
    hist[matrix_key(sample_rank_at_most(2, 1, rng))]++;
  ASSERT_EQ(hist.size(), 10u);
  std::vector<uint64_t> obs;
  std::vector<double> expect;
  for (auto& [key, cnt] : hist) {
    ASSERT_LE(rank(matrix_from_key(key, 2)), 1u);
    obs.push_back(cnt);
    expect.push_back(double(draws) / 10.0);
  }
  Chi2Result c = chi_square(obs, expect, 0.01);
  EXPECT_TRUE(c.pass) << "chi2 stat " << c.stat << " crit " << c.critical;
}

TEST(F2Mat, FullRankFrequencyOfUniformSquare) {
  // empirical full-rank rate of uniform 8x8 vs prod_{j=1..8} (1 - 2^-j)
  Rng rng(17);
  double expect = 1.0;
  for (int j = 1; j <= 8; j++) expect *= 1.0 - std::ldexp(1.0, -j);
  EXPECT_NEAR(expect, 0.2899, 5e-4);
  const int trials = 6000;
  int full = 0;
  for (int i = 0; i < trials; i++)
    if (rank(sample_uniform(8, 8, rng)) == 8) full++;
  EXPECT_NEAR(double(full) / trials, expect, 0.03);
}

// ---------- rng ----------

TEST(Rng, DeterministicAndSeedSeparated) {
  Rng a(42), b(42), c(43);
  bool diff = false;
  for (int i = 0; i < 64; i++) {
    uint64_t x = a.next_u64();
    ASSERT_EQ(x, b.next_u64());
    if (x != c.next_u64()) diff = true;
  }
  EXPECT_TRUE(diff);
}

TEST(Rng, HexSeedRoundTrip) {
  std::string hex =
      "000102030405060708090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f";
  Rng a = Rng::from_hex(hex);
  Rng b = Rng::from_hex(hex);
  for (int i = 0; i < 16; i++) ASSERT_EQ(a.next_u64(), b.next_u64());
  EXPECT_THROW(Rng::from_hex("f00"), std::invalid_argument);
  EXPECT_THROW(Rng::from_hex(std::string(64, 'g')), std::invalid_argument);
}

TEST(Rng, ForkedStreamsDiffer) {
  Rng parent(5);
  Rng c1 = parent.fork();
  Rng c2 = parent.fork();
  int same = 0;
  for (int i = 0; i < 64; i++)
    if (c1.next_u64() == c2.next_u64()) same++;
  EXPECT_EQ(same, 0);
}

TEST(Rng, BelowIsInRangeAndRoughlyUniform) {
  Rng rng(6);
  std::vector<uint64_t> hist(7, 0);
  for (int i = 0; i < 70000; i++) hist[rng.below(7)]++;
  std::vector<double> expect(7, 10000.0);
  EXPECT_TRUE(chi_square(hist, expect, 0.01).pass);
}

// ---------- statistics helpers ----------

TEST(StatHelpers, WilsonAndChi2Sanity) {
  // Wilson half-width shrinks with n and is ~1.96*sqrt(p(1-p)/n) for large n
  double hw = wilson_halfwidth(5000, 10000);
  EXPECT_NEAR(hw, 1.96 * std::sqrt(0.25 / 10000.0), 1e-4);
  EXPECT_GT(wilson_halfwidth(50, 100), hw);
  // chi2 critical at df=1..4, 0.01: classic table values
  EXPECT_NEAR(chi2_critical(1, 0.01), 6.635, 0.15);
  EXPECT_NEAR(chi2_critical(4, 0.01), 13.277, 0.1);
  EXPECT_NEAR(chi2_critical(100, 0.01), 135.807, 0.5);
}

TEST(StatHelpers, ExactTvTiny) {
  std::vector<double> u = {0.25, 0.25, 0.25, 0.25};
  std::vector<double> p = {1.0, 0.0, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(exact_tv(u, u), 0.0);
  EXPECT_DOUBLE_EQ(exact_tv(u, p), 0.75);
}

TEST(StatHelpers, DualBlockMarginalTvRoutesAgree) {
  for (uint32_t d : {2u, 4u, 9u}) {
    double a = dual_block_marginal_tv_analytic(d);
    double e = dual_block_marginal_tv_enumerated(d);
    ASSERT_NEAR(a, e, 1e-12) << "d=" << d;
  }
  // frozen: d=4 gives 15/256
  EXPECT_NEAR(dual_block_marginal_tv_analytic(4), 15.0 / 256.0, 1e-15);
}
