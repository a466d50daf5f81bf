#pragma once

#include <optional>
#include <sstream>

#include "blockip.hpp"
#include "f2mat.hpp"
#include "rng.hpp"

namespace mrk {

inline uint32_t ceil_log2(uint32_t n) {
  if (n == 0) throw std::invalid_argument("ceil_log2(0)");
  return uint32_t(std::bit_width(n - 1));
}

// Instance / scheme parameters. tau is the decryption rank threshold
// (defaults to r^2, kept configurable for experiments). strict selects the
// conservative correctness/security margins at key generation:
//   r^2 <  t - ceil(log2 n)            (correctness margin)
//   (n/t)^2 - 2k - 1 >= ceil(log2 n)   (duality margin)
struct Params {
  uint32_t n = 0, k = 0, r = 0, t = 0;
  uint32_t tau = 0;
  bool strict = true;

  static Params make(uint32_t n, uint32_t k, uint32_t r, uint32_t t,
                     bool strict = true) {
    Params p;
    p.n = n;
    p.k = k;
    p.r = r;
    p.t = t;
    p.tau = r * r;
    p.strict = strict;
    return p;
  }

  friend bool operator==(const Params&, const Params&) = default;
};

struct ParamReport {
  bool ok = false;         // hard invariants, plus margins when strict
  bool strict_ok = false;  // both margins hold
  int64_t corr_margin = 0;  // t - ceil(log2 n) - r^2, needs > 0
  int64_t dual_margin = 0;  // (n/t)^2 - 2k - 1 - ceil(log2 n), needs >= 0
  std::vector<std::string> issues;

  std::string to_string() const {
    std::ostringstream os;
    os << "correctness margin (t - ceil(log2 n) - r^2): " << corr_margin
       << (corr_margin > 0 ? " ok" : " VIOLATED") << "\n";
    os << "duality margin ((n/t)^2 - 2k - 1 - ceil(log2 n)): " << dual_margin
       << (dual_margin >= 0 ? " ok" : " VIOLATED") << "\n";
    for (const auto& s : issues) os << "error: " << s << "\n";
    return os.str();
  }
};

inline ParamReport validate(const Params& p) {
  ParamReport rep;
  if (p.n == 0) rep.issues.push_back("n must be positive");
  if (p.k == 0) rep.issues.push_back("k must be positive");
  if (p.t == 0) rep.issues.push_back("t must be positive");
  if (p.n > kMaxDim) rep.issues.push_back("n exceeds supported maximum");
  if (p.t != 0 && p.n != 0 && p.n % p.t != 0) rep.issues.push_back("t must divide n");
  if (p.r > p.n) rep.issues.push_back("r must be at most n");
  bool hard_ok = rep.issues.empty();
  if (hard_ok) {
    uint32_t cl2 = ceil_log2(p.n);
    rep.corr_margin = int64_t(p.t) - int64_t(cl2) - int64_t(p.r) * p.r;
    uint64_t bsq = uint64_t(p.n / p.t) * (p.n / p.t);
    rep.dual_margin = int64_t(bsq) - 2 * int64_t(p.k) - 1 - int64_t(cl2);
    rep.strict_ok = rep.corr_margin > 0 && rep.dual_margin >= 0;
    if (p.strict && !rep.strict_ok) {
      if (rep.corr_margin <= 0)
        rep.issues.push_back("strict: correctness margin violated (r^2 >= t - ceil(log2 n))");
      if (rep.dual_margin < 0)
        rep.issues.push_back("strict: duality margin violated ((n/t)^2 - 2k - 1 < ceil(log2 n))");
    }
  }
  rep.ok = rep.issues.empty();
  return rep;
}

inline void require_valid(const Params& p) {
  ParamReport rep = validate(p);
  if (!rep.ok) {
    std::string msg = "invalid parameters:";
    for (const auto& s : rep.issues) msg += " " + s + ";";
    throw std::invalid_argument(msg);
  }
}

struct Witness {
  BitVector s;
  BitMatrix e;
};

// Decision-MinRank instance: (A_1..A_k, Y). Planted side has
// Y = sum s_i A_i + E with rank(E) <= r; the witness is retained only when
// the sampler is asked to and can be erased explicitly.
struct PlantedInstance {
  Params params;
  MatrixTuple as;
  BitMatrix y;
  std::optional<Witness> witness;
};

inline PlantedInstance sample_planted(const Params& p, Rng& rng,
                                      bool keep_witness = true) {
  require_valid(p);
  PlantedInstance inst;
  inst.params = p;
  inst.as = MatrixTuple(p.n, p.n);
  for (uint32_t i = 0; i < p.k; i++)
    inst.as.push_back(sample_uniform(p.n, p.n, rng));
  BitVector s = sample_uniform_vector(p.k, rng);
  BitMatrix e = sample_rank_at_most(p.n, p.r, rng);
  inst.y = tuple_combination(inst.as, s);
  add_in_place(inst.y, e);
  if (keep_witness) inst.witness = Witness{std::move(s), std::move(e)};
  return inst;
}

inline PlantedInstance sample_uniform_instance(const Params& p, Rng& rng) {
  require_valid(p);
  PlantedInstance inst;
  inst.params = p;
  inst.as = MatrixTuple(p.n, p.n);
  for (uint32_t i = 0; i < p.k; i++)
    inst.as.push_back(sample_uniform(p.n, p.n, rng));
  inst.y = sample_uniform(p.n, p.n, rng);
  return inst;
}

inline void erase_witness(PlantedInstance& inst) {
  if (inst.witness) {
    inst.witness->e.wipe();
    inst.witness.reset();
  }
}

inline bool verify_solution(const MatrixTuple& as, const BitMatrix& y,
                            uint32_t r, const BitVector& s) {
  BitMatrix residual = tuple_combination(as, s);
  add_in_place(residual, y);
  return rank(residual) <= r;
}

inline bool verify_solution(const PlantedInstance& inst, const BitVector& s) {
  return verify_solution(inst.as, inst.y, inst.params.r, s);
}

// Homogeneous-looking reformulation: the k+1 matrices (A_1..A_k, Y) in a
// random order, with the position of Y recorded.
struct PermutedTuple {
  MatrixTuple all;
  uint32_t y_index = 0;
};

inline PermutedTuple permuted_formulation(const PlantedInstance& inst, Rng& rng) {
  uint32_t k = uint32_t(inst.as.size());
  std::vector<uint32_t> perm(k + 1);
  for (uint32_t i = 0; i <= k; i++) perm[i] = i;
  for (uint32_t i = k; i > 0; i--)
    std::swap(perm[i], perm[uint32_t(rng.below(i + 1))]);
  PermutedTuple out;
  out.all = MatrixTuple(inst.params.n, inst.params.n);
  for (uint32_t i = 0; i <= k; i++) {
    uint32_t src = perm[i];
    if (src == k) {
      out.y_index = i;
      out.all.push_back(inst.y);
    } else {
      out.all.push_back(inst.as[src]);
    }
  }
  return out;
}

// Dual decision instance: (H_1..H_l, Z_1..Z_l) with Z_i t x t. Planted side
// has Z_i = <H_i, E>_t for a hidden rank <= r matrix E.
struct DualInstance {
  uint32_t n = 0, l = 0, r = 0, t = 0;
  std::vector<BitMatrix> hs;
  std::vector<BitMatrix> zs;
  std::optional<BitMatrix> witness_e;
};

inline DualInstance sample_dual_yes(uint32_t n, uint32_t l, uint32_t r,
                                    uint32_t t, Rng& rng,
                                    bool keep_witness = true) {
  BlockIpContext ctx(n, t);
  if (r > n) throw std::invalid_argument("sample_dual_yes: r > n");
  DualInstance di;
  di.n = n; di.l = l; di.r = r; di.t = t;
  BitMatrix e = sample_rank_at_most(n, r, rng);
  for (uint32_t i = 0; i < l; i++) {
    di.hs.push_back(sample_uniform(n, n, rng));
    di.zs.push_back(block_ip(ctx, di.hs.back(), e));
  }
  if (keep_witness) di.witness_e = std::move(e);
  return di;
}

inline DualInstance sample_dual_no(uint32_t n, uint32_t l, uint32_t r,
                                   uint32_t t, Rng& rng) {
  BlockIpContext ctx(n, t);
  if (r > n) throw std::invalid_argument("sample_dual_no: r > n");
  DualInstance di;
  di.n = n; di.l = l; di.r = r; di.t = t;
  for (uint32_t i = 0; i < l; i++) {
    di.hs.push_back(sample_uniform(n, n, rng));
    di.zs.push_back(sample_uniform(t, t, rng));
  }
  return di;
}

}  // namespace mrk
