#pragma once

#include "blockip.hpp"
#include "f2mat.hpp"
#include "minrank.hpp"
#include "rng.hpp"

namespace mrk {

struct PublicKey {
  Params params;
  MatrixTuple as;
  BitMatrix y;
};

struct SecretKey {
  Params params;
  BitVector s;
};

struct KeyPair {
  PublicKey pk;
  SecretKey sk;
};

struct Ciphertext {
  uint32_t k = 0, t = 0;
  std::vector<BitMatrix> cs;  // k+1 matrices, each t x t
};

// KeyGen is exactly the planted sampler: pk = (A_1..A_k, Y), sk = s.
// The low-rank error E is wiped, not kept.
inline KeyPair keygen(const Params& p, Rng& rng) {
  PlantedInstance inst = sample_planted(p, rng, /*keep_witness=*/true);
  KeyPair kp;
  kp.pk.params = p;
  kp.pk.as = std::move(inst.as);
  kp.pk.y = std::move(inst.y);
  kp.sk.params = p;
  kp.sk.s = std::move(inst.witness->s);
  inst.witness->e.wipe();
  return kp;
}

// bit 0: sample a fresh rank <= r matrix R and publish the block inner
// products of R against every public matrix (Y last). R is wiped.
// bit 1: k+1 independent uniform t x t matrices.
inline Ciphertext encrypt(const PublicKey& pk, bool bit, Rng& rng) {
  const Params& p = pk.params;
  if (pk.as.size() != p.k)
    throw std::invalid_argument("encrypt: public key tuple size mismatch");
  Ciphertext ct;
  ct.k = p.k;
  ct.t = p.t;
  ct.cs.reserve(p.k + 1);
  if (!bit) {
    BlockIpContext ctx(p.n, p.t);
    BitMatrix r = sample_rank_at_most(p.n, p.r, rng);
    for (uint32_t i = 0; i < p.k; i++)
      ct.cs.push_back(block_ip(ctx, r, pk.as[i]));
    ct.cs.push_back(block_ip(ctx, r, pk.y));
    r.wipe();
  } else {
    for (uint32_t i = 0; i <= p.k; i++)
      ct.cs.push_back(sample_uniform(p.t, p.t, rng));
  }
  return ct;
}

// M = C_{k+1} + sum_i s_i C_i. For bit 0 this collapses to <R, E>_t by
// bilinearity, so rank(M) <= r^2 <= tau; a uniform tuple lands above tau
// except with probability about 2^(r^2 + 1 - t).
inline bool decrypt(const SecretKey& sk, const Ciphertext& ct) {
  const Params& p = sk.params;
  if (ct.k != p.k || ct.t != p.t || ct.cs.size() != size_t(p.k) + 1)
    throw std::invalid_argument("decrypt: ciphertext shape mismatch");
  BitMatrix m = ct.cs[p.k];
  for (uint32_t i = 0; i < p.k; i++)
    scale_accumulate(m, sk.s.get(i), ct.cs[i]);
  return rank(m) > p.tau;
}

inline PlantedInstance to_instance(const PublicKey& pk) {
  PlantedInstance inst;
  inst.params = pk.params;
  inst.as = pk.as;
  inst.y = pk.y;
  return inst;
}

}  // namespace mrk
