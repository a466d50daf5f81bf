#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "minrank.hpp"

namespace mrk {

// Result of one attack run. found, when present, always passes
// verify_solution against the attacked instance. trials counts restarts
// (kernel guesses, permutation attempts); iterations counts candidate
// solutions actually tested.
struct AttackResult {
  std::optional<BitVector> found;
  uint64_t iterations = 0;
  uint64_t trials = 0;
  double wall_time_s = 0.0;
  std::string note;
};

namespace attack_detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline void xor_into(BitVector& a, const BitVector& b) {
  for (uint32_t i = 0; i < a.size(); i++)
    if (b.get(i)) a.flip(i);
}

inline BitMatrix permute_cols(const BitMatrix& a,
                              const std::vector<uint32_t>& perm) {
  BitMatrix out(a.rows(), a.cols());
  for (uint32_t i = 0; i < a.rows(); i++)
    for (uint32_t j = 0; j < a.cols(); j++)
      if (a.get(i, perm[j])) out.set(i, j, true);
  return out;
}

// Enumerate the affine solution space (particular + span of kernel) in
// Gray-code order, test the s-prefix of each point, stop at the first
// verifying candidate. Caller guarantees kern.size() <= 12.
inline bool scan_solution_space(const PlantedInstance& inst,
                                const BitVector& particular,
                                const std::vector<BitVector>& kern,
                                AttackResult& res) {
  BitVector cur = particular;
  uint64_t combos = uint64_t(1) << kern.size();
  for (uint64_t m = 0;; m++) {
    res.iterations++;
    BitVector s(inst.params.k);
    for (uint32_t j = 0; j < inst.params.k; j++) s.set(j, cur.get(j));
    if (verify_solution(inst, s)) {
      res.found = std::move(s);
      return true;
    }
    if (m + 1 == combos) return false;
    xor_into(cur, kern[std::countr_zero(m + 1)]);
  }
}

}  // namespace attack_detail

// Exhaustive sweep over s in Gray-code order: each step updates the residual
// Y - A(s) by a single matrix XOR, then rank-tests it.
inline AttackResult brute_force_s(const PlantedInstance& inst,
                                  uint64_t budget = uint64_t(1) << 30) {
  const Params& p = inst.params;
  if (p.k > 30) throw std::invalid_argument("brute_force_s: k > 30");
  uint64_t space = uint64_t(1) << p.k;
  if (space > budget)
    throw std::runtime_error("brute_force_s: budget below 2^k sweep");
  attack_detail::Stopwatch sw;
  AttackResult res;
  res.trials = 1;
  BitMatrix residual = inst.y;
  BitVector cand(p.k);
  for (uint64_t g = 0;; g++) {
    res.iterations++;
    if (rank(residual) <= p.r) {
      res.found = cand;
      break;
    }
    if (g + 1 == space) break;
    uint32_t bit = uint32_t(std::countr_zero(g + 1));
    cand.flip(bit);
    add_in_place(residual, inst.as[bit]);
  }
  res.note = res.found ? "found" : "full sweep, no solution";
  res.wall_time_s = sw.seconds();
  return res;
}

namespace attack_detail {

// Visit every E of rank exactly rho (duplicate-free) as C * R, where R runs
// over rank-rho reduced row echelon forms and C over full-column-rank n x rho
// coefficient matrices. visit returns true to stop early.
inline bool for_each_rank_exact(uint32_t n, uint32_t rho,
                                const std::function<bool(const BitMatrix&)>& visit) {
  if (rho == 0) return visit(BitMatrix(n, n));
  // pivot columns as an increasing index vector
  std::vector<uint32_t> piv(rho);
  std::iota(piv.begin(), piv.end(), 0);
  while (true) {
    // free positions of the echelon form: row i, columns after piv[i] that
    // are not themselves pivots
    std::vector<std::pair<uint32_t, uint32_t>> free_pos;
    for (uint32_t i = 0; i < rho; i++)
      for (uint32_t c = piv[i] + 1; c < n; c++)
        if (std::find(piv.begin(), piv.end(), c) == piv.end())
          free_pos.push_back({i, c});
    for (uint64_t bits = 0; bits < (uint64_t(1) << free_pos.size()); bits++) {
      BitMatrix rr(rho, n);
      for (uint32_t i = 0; i < rho; i++) rr.set(i, piv[i], true);
      for (size_t f = 0; f < free_pos.size(); f++)
        if (bits >> f & 1) rr.set(free_pos[f].first, free_pos[f].second, true);
      for (uint64_t cb = 0; cb < (uint64_t(1) << (uint64_t(n) * rho)); cb++) {
        BitMatrix cm(n, rho);
        for (uint32_t i = 0; i < n; i++)
          for (uint32_t j = 0; j < rho; j++)
            if (cb >> (uint64_t(i) * rho + j) & 1) cm.set(i, j, true);
        if (rank(cm) < rho) continue;
        if (visit(mul(cm, rr))) return true;
      }
    }
    // next pivot combination
    uint32_t i = rho;
    while (i-- > 0) {
      if (piv[i] + (rho - i) < n) {
        piv[i]++;
        for (uint32_t j = i + 1; j < rho; j++) piv[j] = piv[j - 1] + 1;
        break;
      }
      if (i == 0) return false;
    }
  }
}

}  // namespace attack_detail

// Enumerate all E' with rank <= r (exactly once each), and for each solve the
// linear system A(s) = Y - E' over the k unknowns s.
inline AttackResult brute_force_E(const PlantedInstance& inst,
                                  uint64_t budget = uint64_t(1) << 22) {
  const Params& p = inst.params;
  cpp_int total = 0;
  for (uint32_t rho = 0; rho <= p.r && rho <= p.n; rho++)
    total += count_rank_exact(p.n, rho);
  if (total > budget)
    throw std::runtime_error("brute_force_E: enumeration size " +
                             total.str() + " exceeds budget");
  attack_detail::Stopwatch sw;
  AttackResult res;
  res.trials = 1;
  // column i of the linearized system is vec(A_i)
  BitMatrix m(p.n * p.n, p.k);
  for (uint32_t i = 0; i < p.k; i++) {
    BitVector vi = vec(inst.as[i]);
    for (uint32_t row = 0; row < vi.size(); row++)
      if (vi.get(row)) m.set(row, i, true);
  }
  auto try_candidate = [&](const BitMatrix& e) {
    res.iterations++;
    BitMatrix target = inst.y;
    add_in_place(target, e);
    std::optional<BitVector> s = solve(m, vec(target));
    if (s && verify_solution(inst, *s)) {
      res.found = std::move(*s);
      return true;
    }
    return false;
  };
  for (uint32_t rho = 0; rho <= p.r && rho <= p.n; rho++)
    if (attack_detail::for_each_rank_exact(p.n, rho, try_candidate)) break;
  res.note = res.found ? "found" : "enumeration complete, no solution";
  res.wall_time_s = sw.seconds();
  return res;
}

namespace attack_detail {

// One kernel-attack trial: guess ceil(k/n) independent kernel vectors of the
// unknown E, solve the induced linear system for s, scan its solution space.
inline bool kernel_trial(const PlantedInstance& inst, Rng& rng,
                         AttackResult& res) {
  const Params& p = inst.params;
  uint32_t m = (p.k + p.n - 1) / p.n;
  BitMatrix ys(m, p.n);
  do {
    ys = sample_uniform(m, p.n, rng);
  } while (rank(ys) < m);
  BitMatrix coeff(p.n * m, p.k);
  BitVector rhs(p.n * m);
  for (uint32_t j = 0; j < m; j++) {
    BitVector yj(p.n);
    for (uint32_t c = 0; c < p.n; c++) yj.set(c, ys.get(j, c));
    for (uint32_t i = 0; i < p.k; i++) {
      BitVector col = mul(inst.as[i], yj);
      for (uint32_t row = 0; row < p.n; row++)
        if (col.get(row)) coeff.set(j * p.n + row, i, true);
    }
    BitVector yv = mul(inst.y, yj);
    for (uint32_t row = 0; row < p.n; row++)
      if (yv.get(row)) rhs.set(j * p.n + row, true);
  }
  std::optional<BitVector> part = solve(coeff, rhs);
  if (!part) return false;
  std::vector<BitVector> kern = kernel_basis(coeff);
  if (kern.size() > 12) return false;
  return scan_solution_space(inst, *part, kern, res);
}

}  // namespace attack_detail

// Kernel attack: repeat trials until a guessed kernel-vector set yields a
// verifying s. Succeeds per trial with probability about 2^{-r ceil(k/n)} on
// random planted instances. threads > 1 splits trials across workers with
// forked rng streams (result then depends on the thread count).
inline AttackResult kernel_attack(const PlantedInstance& inst, Rng& rng,
                                  uint64_t max_trials = 4096,
                                  uint32_t threads = 1) {
  attack_detail::Stopwatch sw;
  AttackResult res;
  if (threads <= 1) {
    for (uint64_t t = 0; t < max_trials; t++) {
      res.trials = t + 1;
      if (attack_detail::kernel_trial(inst, rng, res)) break;
    }
  } else {
    std::vector<Rng> streams;
    for (uint32_t w = 0; w < threads; w++) streams.push_back(rng.fork());
    std::atomic<uint64_t> next{0}, iters{0};
    std::atomic<bool> done{false};
    std::mutex mu;
    std::vector<std::thread> pool;
    for (uint32_t w = 0; w < threads; w++) {
      pool.emplace_back([&, w] {
        while (!done.load()) {
          uint64_t t = next.fetch_add(1);
          if (t >= max_trials) break;
          AttackResult local;
          if (attack_detail::kernel_trial(inst, streams[w], local)) {
            std::lock_guard<std::mutex> lk(mu);
            if (!res.found) res.found = std::move(local.found);
            done.store(true);
          }
          iters.fetch_add(local.iterations);
        }
      });
    }
    for (auto& th : pool) th.join();
    res.trials = std::min(next.load(), max_trials);
    res.iterations = iters.load();
  }
  res.note = res.found ? "found" : "max_trials exhausted";
  res.wall_time_s = sw.seconds();
  return res;
}

// The bilinear system E(s) K(y) = 0 after linearization. The kernel ansatz K
// carries the y-variable block in its first r rows and an identity below, so
// column r+c of E(s) is constrained into the span of the first r columns.
// Unknown layout: s_0..s_{k-1}, then y_{u,c} (u < r, c < n-r) row-major, then
// z_{i,u,c} = s_i y_{u,c} with index ((i r + u)(n-r) + c).
inline std::pair<BitMatrix, BitVector> ks_system(const MatrixTuple& as,
                                                 const BitMatrix& ym,
                                                 uint32_t r) {
  uint32_t n = ym.rows(), k = uint32_t(as.size());
  if (r > n) throw std::invalid_argument("ks_system: r > n");
  uint32_t d = n - r;
  uint64_t unknowns = uint64_t(k) + uint64_t(r) * d + uint64_t(k) * r * d;
  BitMatrix coeff(n * d, uint32_t(unknowns));
  BitVector rhs(n * d);
  for (uint32_t rho = 0; rho < n; rho++) {
    for (uint32_t c = 0; c < d; c++) {
      uint32_t row = rho * d + c;
      for (uint32_t i = 0; i < k; i++)
        if (as[i].get(rho, r + c)) coeff.set(row, i, true);
      for (uint32_t u = 0; u < r; u++) {
        if (ym.get(rho, u)) coeff.set(row, k + u * d + c, true);
        for (uint32_t i = 0; i < k; i++)
          if (as[i].get(rho, u))
            coeff.set(row, k + r * d + (i * r + u) * d + c, true);
      }
      if (ym.get(rho, r + c)) rhs.set(row, true);
    }
  }
  return {std::move(coeff), std::move(rhs)};
}

// Kipnis-Shamir linearization. Requires the linearized system to be formally
// overdetermined: n(n-r) equations vs k + r(n-r) + k r(n-r) unknowns. A single
// run succeeds when the first r columns of E span its column space; retries
// re-pose the instance under deterministic pseudorandom column permutations
// (same s, equivalent instance). budget caps the permutation attempts.
inline AttackResult ks_linearization(const PlantedInstance& inst,
                                     uint64_t budget = 64) {
  const Params& p = inst.params;
  uint32_t d = p.n - p.r;
  uint64_t unknowns = uint64_t(p.k) + uint64_t(p.r) * d + uint64_t(p.k) * p.r * d;
  uint64_t equations = uint64_t(p.n) * d;
  if (equations < unknowns)
    throw std::invalid_argument(
        "ks_linearization: inapplicable parameters (" +
        std::to_string(equations) + " equations vs " +
        std::to_string(unknowns) + " linearized unknowns)");
  attack_detail::Stopwatch sw;
  AttackResult res;
  bool saw_underdetermined = false;
  for (uint64_t attempt = 0; attempt < budget && !res.found; attempt++) {
    res.trials = attempt + 1;
    std::vector<uint32_t> perm(p.n);
    std::iota(perm.begin(), perm.end(), 0);
    if (attempt > 0) {
      Rng prng(attempt);  // deterministic retry schedule
      for (uint32_t i = p.n - 1; i > 0; i--)
        std::swap(perm[i], perm[uint32_t(prng.below(i + 1))]);
    }
    MatrixTuple bs(p.n, p.n);
    for (uint32_t i = 0; i < p.k; i++)
      bs.push_back(attack_detail::permute_cols(inst.as[i], perm));
    BitMatrix zm = attack_detail::permute_cols(inst.y, perm);
    auto [coeff, rhs] = ks_system(bs, zm, p.r);
    std::optional<BitVector> part = solve(coeff, rhs);
    if (!part) continue;
    std::vector<BitVector> kern = kernel_basis(coeff);
    if (kern.size() > 12) {
      saw_underdetermined = true;
      continue;
    }
    // column permutations preserve ranks, so candidates verify directly
    // against the original instance
    attack_detail::scan_solution_space(inst, *part, kern, res);
  }
  if (res.found)
    res.note = "found";
  else
    res.note = saw_underdetermined ? "linearized system underdetermined"
                                   : "attempts exhausted";
  res.wall_time_s = sw.seconds();
  return res;
}

// ---------- closed-form complexity estimates ----------

// One row of the complexity table. log2_cost is the log2 of the dominant
// term only; constants and polynomial smearing are ignored on purpose.
// implemented marks rows with a full attack implementation above; lower_bound
// marks equation-count lower bounds rather than attack costs; quantum rows
// are excluded from classical rankings.
struct ComplexityEstimate {
  std::string attack;
  double log2_cost = 0.0;
  bool applicable = true;
  std::string reason;
  double omega = 2.81;
  bool implemented = false;
  bool lower_bound = false;
  bool quantum = false;
};

inline double log2_binomial(double a, double b) {
  if (b < 0 || b > a) throw std::invalid_argument("log2_binomial: b outside [0, a]");
  return (std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(a - b + 1.0)) /
         std::log(2.0);
}

// Plug-in cost table for all surveyed algorithms at the given parameters.
// Uses only n, k, r (t never enters the attack costs). omega is the matrix
// multiplication exponent. Estimator-only rows model algorithms whose full
// implementations are out of scope here.
inline std::vector<ComplexityEstimate> estimate_all(const Params& p,
                                                    double omega = 2.81) {
  if (p.n == 0 || p.k == 0 || p.r > p.n)
    throw std::invalid_argument("estimate_all: need n >= 1, k >= 1, r <= n");
  if (omega < 2.0 || omega > 3.0)
    throw std::invalid_argument("estimate_all: omega outside [2, 3]");
  double n = p.n, k = p.k, r = p.r;
  double ln = std::log2(n), lk = std::log2(k);
  double ceil_kn = std::ceil(k / n);
  std::vector<ComplexityEstimate> out;

  auto add = [&](ComplexityEstimate e) {
    e.omega = omega;
    out.push_back(std::move(e));
  };

  add({.attack = "brute-force-s",
       .log2_cost = k + omega * ln,
       .reason = "sweep all 2^k combinations, rank test each",
       .implemented = true});

  add({.attack = "rank-enumeration",
       .log2_cost = p.r >= 1
                        ? 2 * n * r - r * r + r + std::log2(r) + 2 * omega * ln
                        : 2 * omega * ln,
       .reason = "enumerate rank <= r matrices (about 2^(2nr - r^2 + r)), "
                 "solve for s each time",
       .implemented = true});

  add({.attack = "kernel",
       .log2_cost = r * ceil_kn + omega * lk,
       .reason = "guess ceil(k/n) kernel vectors, solve the linear system; "
                 "expected 2^(r ceil(k/n)) repetitions",
       .implemented = true});

  {
    double d = n - r;
    double unknowns = k + r * d + k * r * d;
    bool app = n * d >= unknowns;
    add({.attack = "ks-linearization",
         .log2_cost = app ? omega * std::log2(unknowns) : 0.0,
         .applicable = app,
         .reason = app ? "solve the linearized bilinear system directly"
                       : "underdetermined: n(n-r) equations < k+r(n-r)+kr(n-r) "
                         "unknowns",
         .implemented = true});
  }

  {
    double q = k * (r + 1) / (n + k);
    bool app = p.r >= 1 && r * q > 1.0;
    add({.attack = "ks-xl",
         .log2_cost = app ? (q + 1) * omega * std::log2(r * q) : 0.0,
         .applicable = app,
         .reason = app ? "literal reading: (r q)^((q+1) omega), q = k(r+1)/(n+k)"
                       : "degree parameter r k(r+1)/(n+k) <= 1"});
  }

  {
    double dreg = std::min((n - r) * r, k) + 1;
    add({.attack = "ks-groebner",
         .log2_cost = omega * log2_binomial(k + r * (n - r) + dreg, dreg),
         .reason = "degree of regularity bound min((n-r)r, k) + 1"});
  }

  {
    bool app = k <= n * (n - r) + 1;
    add({.attack = "minors-groebner",
         .log2_cost = app ? omega * log2_binomial(n * (n - r) + 1, k) : 0.0,
         .applicable = app,
         .reason = app ? "degree of regularity bound n(n-r) - k + 1"
                       : "k exceeds the regularity bound's binomial range"});
  }

  {
    bool app = std::exp(1.0) * (k + r) <= n * n / (r + 1);
    add({.attack = "minors-linearization",
         .log2_cost = app ? omega * log2_binomial(k + r, r + 1) : 0.0,
         .applicable = app,
         .reason = app ? "minor equations outnumber the degree-(r+1) monomials"
                       : "needs e(k+r) <= n^2/(r+1)"});
  }

  {
    bool app = n * (n - r) / (r + 1) >= k;
    add({.attack = "support-minors",
         .log2_cost = app ? omega * (lk + log2_binomial(n, r)) : 0.0,
         .applicable = app,
         .reason = app ? "linearized over the k binom(n,r) products"
                       : "needs n(n-r)/(r+1) >= k"});
  }

  add({.attack = "ks-quantum",
       .log2_cost = r / 2 * ceil_kn,
       .reason = "quantum search over the kernel-vector guess",
       .quantum = true});

  add({.attack = "minors-eqs-lb",
       .log2_cost = 2 * log2_binomial(n, std::min(r + 1, n)),
       .reason = "time to write down the binom(n,r+1)^2 minor equations",
       .lower_bound = true});

  add({.attack = "support-minors-eqs-lb",
       .log2_cost = ln + log2_binomial(n, std::min(r + 1, n)),
       .reason = "time to write down the n binom(n,r+1) minor equations",
       .lower_bound = true});

  return out;
}

// Cheapest applicable classical attack row (ignores lower-bound and quantum
// rows); implemented_only restricts to attacks with implementations here.
inline const ComplexityEstimate* cheapest_attack(
    const std::vector<ComplexityEstimate>& v, bool implemented_only = false) {
  const ComplexityEstimate* best = nullptr;
  for (const auto& e : v) {
    if (!e.applicable || e.lower_bound || e.quantum) continue;
    if (implemented_only && !e.implemented) continue;
    if (!best || e.log2_cost < best->log2_cost) best = &e;
  }
  return best;
}

inline nlohmann::json estimates_to_json(
    const std::vector<ComplexityEstimate>& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : v)
    arr.push_back({{"attack", e.attack},
                   {"log2_cost", e.log2_cost},
                   {"applicable", e.applicable},
                   {"reason", e.reason},
                   {"omega", e.omega},
                   {"implemented", e.implemented},
                   {"lower_bound", e.lower_bound},
                   {"quantum", e.quantum}});
  return arr;
}

inline std::string benchmark_csv_header() {
  return "n,k,r,t,attack,trials,successes,mean_iterations,wall_time_s";
}

inline std::string benchmark_csv_row(const Params& p, const std::string& attack,
                                     const std::vector<AttackResult>& runs) {
  uint64_t trials = 0, successes = 0, iters = 0;
  double wall = 0.0;
  for (const auto& r : runs) {
    trials += r.trials;
    successes += r.found ? 1 : 0;
    iters += r.iterations;
    wall += r.wall_time_s;
  }
  std::ostringstream os;
  os << p.n << "," << p.k << "," << p.r << "," << p.t << "," << attack << ","
     << trials << "," << successes << ","
     << (runs.empty() ? 0.0 : double(iters) / double(runs.size())) << ","
     << wall;
  return os.str();
}

}  // namespace mrk
