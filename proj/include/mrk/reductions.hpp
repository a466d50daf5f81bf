#pragma once

#include <cmath>
#include <functional>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <set>

#include "blockip.hpp"
#include "f2mat.hpp"
#include "minrank.hpp"
#include "rng.hpp"

namespace mrk {

// A decision oracle for (A_1..A_k, Y) instances. declared_advantage is
// metadata used by callers to size experiments; the measured advantage is
// what the harness reports.
struct Distinguisher {
  std::string name;
  double declared_advantage = 0.0;
  std::function<bool(const MatrixTuple&, const BitMatrix&)> accept;
};

// A decision oracle for dual instances (H_1..H_l, Z_1..Z_l).
struct DualDistinguisher {
  std::string name;
  double declared_advantage = 0.0;
  std::function<bool(const std::vector<BitMatrix>&, const std::vector<BitMatrix>&)>
      accept;
};

// ---- test oracles ----

// Ideal oracle: knows s out of band, accepts iff rank(Y - A(s)) <= r.
inline Distinguisher make_witness_cheating(const BitVector& s, uint32_t r) {
  Distinguisher d;
  d.name = "witness-cheating";
  d.declared_advantage = 1.0;
  d.accept = [s, r](const MatrixTuple& as, const BitMatrix& y) {
    return verify_solution(as, y, r, s);
  };
  return d;
}

// Null oracle: ignores the input.
inline Distinguisher make_coin_flip(Rng rng) {
  Distinguisher d;
  d.name = "coin-flip";
  d.declared_advantage = 0.0;
  auto state = std::make_shared<Rng>(std::move(rng));
  d.accept = [state](const MatrixTuple&, const BitMatrix&) {
    return state->next_bit();
  };
  return d;
}

// Honest oracle for weak parameters: exhausts all 2^k combinations and
// accepts iff some s' leaves a rank <= r residual.
inline Distinguisher make_rank_statistic(uint32_t r, uint32_t max_k = 20) {
  Distinguisher d;
  d.name = "rank-statistic";
  d.declared_advantage = 1.0;
  d.accept = [r, max_k](const MatrixTuple& as, const BitMatrix& y) {
    uint32_t k = uint32_t(as.size());
    if (k > max_k)
      throw std::invalid_argument("rank-statistic oracle: k too large");
    BitMatrix residual = y;
    if (rank(residual) <= r) return true;
    uint64_t total = uint64_t(1) << k;
    for (uint64_t i = 1; i < total; i++) {
      uint32_t j = uint32_t(std::countr_zero(i));
      add_in_place(residual, as[j]);
      if (rank(residual) <= r) return true;
    }
    return false;
  };
  return d;
}

// Interpolates between an inner oracle and a coin flip: each query is
// answered honestly with probability beta. If the inner oracle has
// advantage 1, the blend has advantage beta.
inline Distinguisher make_blended(Distinguisher inner, double beta, Rng rng) {
  if (beta < 0.0 || beta > 1.0)
    throw std::invalid_argument("make_blended: beta outside [0,1]");
  Distinguisher d;
  d.name = inner.name + "-blend";
  d.declared_advantage = beta * inner.declared_advantage;
  auto state = std::make_shared<Rng>(std::move(rng));
  auto in = std::make_shared<Distinguisher>(std::move(inner));
  d.accept = [state, in, beta](const MatrixTuple& as, const BitMatrix& y) {
    double coin = double(state->next_u32()) / 4294967296.0;
    if (coin < beta) return in->accept(as, y);
    return state->next_bit();
  };
  return d;
}

// Serializes access so a stateful oracle can be shared between threads.
inline Distinguisher make_synchronized(Distinguisher inner) {
  Distinguisher d;
  d.name = inner.name + "-sync";
  d.declared_advantage = inner.declared_advantage;
  auto mu = std::make_shared<std::mutex>();
  auto in = std::make_shared<Distinguisher>(std::move(inner));
  d.accept = [mu, in](const MatrixTuple& as, const BitMatrix& y) {
    std::lock_guard<std::mutex> lock(*mu);
    return in->accept(as, y);
  };
  return d;
}

// Ideal dual oracle: knows E out of band, accepts iff Z_i = <H_i, E>_t.
inline DualDistinguisher make_dual_witness_cheating(const BitMatrix& e,
                                                    uint32_t t) {
  DualDistinguisher d;
  d.name = "dual-witness-cheating";
  d.declared_advantage = 1.0;
  d.accept = [e, t](const std::vector<BitMatrix>& hs,
                    const std::vector<BitMatrix>& zs) {
    BlockIpContext ctx(e.rows(), t);
    for (size_t i = 0; i < hs.size(); i++)
      if (zs[i] != block_ip(ctx, hs[i], e)) return false;
    return true;
  };
  return d;
}

// Honest dual oracle for r <= 1: accepts iff some rank <= 1 matrix
// E = u v^T reproduces every Z_i = <H_i, E>_t. For fixed u the map
// v -> (<H_i, u v^T>_t)_i is linear, so each u costs one linear solve;
// u is enumerated over F2^n (hence the n <= 20 guard).
inline DualDistinguisher make_dual_consistency_oracle(uint32_t n, uint32_t t,
                                                      uint32_t r) {
  if (r > 1)
    throw std::invalid_argument("dual consistency oracle supports r <= 1 only");
  if (n > 20)
    throw std::invalid_argument("dual consistency oracle: n too large");
  BlockIpContext geometry_check(n, t);
  (void)geometry_check;
  DualDistinguisher d;
  d.name = "dual-consistency";
  d.declared_advantage = 1.0;
  uint32_t b = n / t;
  d.accept = [n, t, b, r](const std::vector<BitMatrix>& hs,
                          const std::vector<BitMatrix>& zs) {
    uint32_t l = uint32_t(hs.size());
    bool all_zero = true;
    for (const auto& z : zs)
      if (!z.is_zero()) all_zero = false;
    if (all_zero) return true;  // E = 0 explains the instance
    if (r == 0) return false;
    // equation (i, a, c): <w restricted to block c, v_c> = Z_i[a, c]
    // where w = u_a^T applied to the block row a of H_i
    uint32_t rows = l * t * t;
    for (uint64_t ubits = 1; ubits < (uint64_t(1) << n); ubits++) {
      BitMatrix coeff(rows, n);
      BitVector rhs(rows);
      uint32_t row = 0;
      for (uint32_t i = 0; i < l; i++) {
        for (uint32_t a = 0; a < t; a++) {
          BitVector w(n);
          for (uint32_t dd = 0; dd < b; dd++)
            if (ubits >> (a * b + dd) & 1) w.xor_with(hs[i].row_vector(a * b + dd));
          for (uint32_t c = 0; c < t; c++) {
            for (uint32_t j = 0; j < b; j++)
              coeff.set(row, c * b + j, w.get(c * b + j));
            rhs.set(row, zs[i].get(a, c));
            row++;
          }
        }
      }
      if (solve(coeff, rhs).has_value()) return true;
    }
    return false;
  };
  return d;
}

// ---- duality reduction ----

// Maps a MinRank instance to a dual instance: samples H_1..H_l from the
// block-wise dual of the tuple and sets Z_i = <H_i, Y>_t. On planted inputs
// Z_i = <H_i, E>_t exactly since the A(s) part is annihilated.
inline DualInstance duality_reduce(const MatrixTuple& as, const BitMatrix& y,
                                   uint32_t l, uint32_t t, Rng& rng) {
  uint32_t n = y.rows();
  if (y.cols() != n) throw std::invalid_argument("duality_reduce: Y not square");
  if (as.size() > 0 && (as.rows() != n || as.cols() != n))
    throw std::invalid_argument("duality_reduce: tuple shape mismatch");
  BlockIpContext ctx(n, t);
  uint32_t b = n / t;
  int64_t margin = int64_t(b) * b - int64_t(as.size()) - int64_t(l);
  if (margin <= 0)
    std::cerr << "warning: duality_reduce: (n/t)^2 - k - l = " << margin
              << " <= 0, dual samples are far from uniform at these sizes\n";
  DualKernels dk = dual_space_block_kernels(ctx, as);
  DualInstance di;
  di.n = n;
  di.l = l;
  di.r = 0;
  di.t = t;
  for (uint32_t i = 0; i < l; i++) {
    di.hs.push_back(sample_dual(dk, rng));
    di.zs.push_back(block_ip(ctx, di.hs.back(), y));
  }
  return di;
}

inline DualInstance duality_reduce(const PlantedInstance& inst, uint32_t l,
                                   Rng& rng) {
  DualInstance di = duality_reduce(inst.as, inst.y, l, inst.params.t, rng);
  di.r = inst.params.r;
  return di;
}

// Composes duality_reduce with a dual oracle to decide primal instances.
inline Distinguisher minrank_distinguisher_from_dual(DualDistinguisher dual,
                                                     uint32_t l, uint32_t t,
                                                     Rng rng) {
  Distinguisher d;
  d.name = dual.name + "-via-duality";
  d.declared_advantage = dual.declared_advantage;
  auto state = std::make_shared<Rng>(std::move(rng));
  auto in = std::make_shared<DualDistinguisher>(std::move(dual));
  d.accept = [state, in, l, t](const MatrixTuple& as, const BitMatrix& y) {
    DualInstance di = duality_reduce(as, y, l, t, *state);
    return in->accept(di.hs, di.zs);
  };
  return d;
}

// ---- search-to-decision ----

// Pred: guesses b, rerandomizes the instance along direction M, and reads
// the distinguisher's verdict as evidence for b = <s, x>. For an oracle
// with advantage beta the output equals <s, x> with probability 1/2 + beta/2.
inline bool predict_inner_product(const Distinguisher& dec,
                                  const MatrixTuple& as, const BitMatrix& y,
                                  const BitVector& x, Rng& rng) {
  uint32_t k = uint32_t(as.size());
  if (x.size() != k)
    throw std::invalid_argument("predict_inner_product: |x| != k");
  uint32_t n = y.rows();
  bool b = rng.next_bit();
  BitMatrix m = sample_uniform(n, n, rng);
  MatrixTuple ap(n, n);
  for (uint32_t i = 0; i < k; i++)
    ap.push_back(x.get(i) ? add(as[i], m) : as[i]);
  BitMatrix yp = y;
  if (b) add_in_place(yp, m);
  bool acc = dec.accept(ap, yp);
  return acc ? b : !b;
}

inline bool predict_inner_product(const Distinguisher& dec,
                                  const PlantedInstance& inst,
                                  const BitVector& x, Rng& rng) {
  return predict_inner_product(dec, inst.as, inst.y, x, rng);
}

struct GlConfig {
  double epsilon = 0.25;
  uint64_t query_budget = uint64_t(1) << 26;
  bool confirm = true;  // candidate confirmation (mandatory in search)
};

// Number of reference vectors: smallest m with 2^m - 1 majority votes per
// bit meeting the Chernoff/union-bound repetition count
// ceil(32 ln(k 2^m) / eps^2).
inline uint32_t gl_reference_count(double epsilon, uint32_t k) {
  for (uint32_t m = 1; m <= 26; m++) {
    double need = 32.0 * std::log(double(k) * std::exp2(double(m))) /
                  (epsilon * epsilon);
    if (double((uint64_t(1) << m) - 1) >= need) return m;
  }
  throw std::invalid_argument("gl_reference_count: epsilon too small");
}

// Classic list decoder: m reference vectors, one inner-product guess per
// assignment, per-bit majority over the 2^m - 1 subset-mixed queries.
// The majorities for all assignments at once are the signs of a
// Walsh-Hadamard transform of the query table. Returns the deduplicated
// candidate list; the caller is responsible for confirmation.
inline std::vector<BitVector> goldreich_levin(
    const std::function<bool(const BitVector&)>& pred, uint32_t k,
    const GlConfig& cfg, Rng& rng) {
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0))
    throw std::invalid_argument("goldreich_levin: epsilon outside (0,1)");
  if (k == 0 || k > 32)
    throw std::invalid_argument("goldreich_levin: k outside [1,32]");
  uint32_t m = gl_reference_count(cfg.epsilon, k);
  uint64_t nmask = uint64_t(1) << m;
  uint64_t queries = (nmask - 1) * k;
  if (queries > cfg.query_budget)
    throw std::runtime_error("goldreich_levin: query budget exhausted (need " +
                             std::to_string(queries) + ")");

  std::vector<BitVector> us;
  for (uint32_t j = 0; j < m; j++)
    us.push_back(sample_uniform_vector(k, rng));

  // f[i][T] = (-1)^pred(u_T + e_i) for nonempty T, 0 for T = 0
  std::vector<std::vector<int32_t>> f(k, std::vector<int32_t>(nmask, 0));
  BitVector ut(k);  // u_T for the current mask, walked in Gray order
  for (uint64_t idx = 1; idx < nmask; idx++) {
    uint64_t g = idx ^ (idx >> 1);
    uint64_t gprev = (idx - 1) ^ ((idx - 1) >> 1);
    ut.xor_with(us[uint32_t(std::countr_zero(g ^ gprev))]);
    for (uint32_t i = 0; i < k; i++) {
      BitVector q = ut;
      q.flip(i);
      f[i][g] = pred(q) ? -1 : 1;
    }
  }

  // in-place Walsh-Hadamard: F[sigma] = sum_T f[T] (-1)^{sigma . T}
  for (uint32_t i = 0; i < k; i++) {
    auto& fi = f[i];
    for (uint64_t h = 1; h < nmask; h <<= 1) {
      for (uint64_t a = 0; a < nmask; a += h << 1) {
        for (uint64_t bpos = a; bpos < a + h; bpos++) {
          int32_t x = fi[bpos], y = fi[bpos + h];
          fi[bpos] = x + y;
          fi[bpos + h] = x - y;
        }
      }
    }
  }

  // assignment sigma guesses <s, u_j> = sigma_j; the majority vote for bit
  // i under sigma is 1 exactly when the transform is negative
  std::set<BitVector> seen;
  std::vector<BitVector> out;
  for (uint64_t sigma = 0; sigma < nmask; sigma++) {
    BitVector cand(k);
    for (uint32_t i = 0; i < k; i++)
      if (f[i][sigma] < 0) cand.set(i, true);
    if (seen.insert(cand).second) out.push_back(cand);
  }
  return out;
}

// Search-to-decision: wraps Pred as the GL oracle with epsilon = beta/4,
// then confirms candidates with verify_solution. Never returns an s' that
// fails confirmation. For k = 1 both constants are appended so the search
// is exhaustive regardless of oracle quality.
inline std::optional<BitVector> search_from_decision(
    const Distinguisher& dec, const PlantedInstance& inst, double beta,
    Rng& rng, const GlConfig* cfg_override = nullptr) {
  uint32_t k = uint32_t(inst.as.size());
  if (k == 0) throw std::invalid_argument("search_from_decision: k = 0");
  if (!(beta > 0.0 && beta <= 1.0))
    throw std::invalid_argument("search_from_decision: beta outside (0,1]");
  GlConfig cfg;
  if (cfg_override) cfg = *cfg_override;
  else cfg.epsilon = beta / 4.0;

  auto pred = [&](const BitVector& x) {
    return predict_inner_product(dec, inst.as, inst.y, x, rng);
  };
  std::vector<BitVector> cands = goldreich_levin(pred, k, cfg, rng);
  if (k == 1) {
    BitVector zero(1), one(1);
    one.set(0, true);
    cands.push_back(zero);
    cands.push_back(one);
  }
  for (const auto& c : cands)
    if (verify_solution(inst, c)) return c;
  return std::nullopt;
}

}  // namespace mrk
