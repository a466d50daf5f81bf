#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "f2mat.hpp"
#include "pke.hpp"
#include "reductions.hpp"
#include "rng.hpp"

namespace mrk {

// ---------- generic statistics ----------

// Half-width of the 95% Wilson score interval for successes/trials.
inline double wilson_halfwidth(uint64_t successes, uint64_t trials) {
  if (trials == 0) throw std::invalid_argument("wilson_halfwidth: no trials");
  const double z = 1.959963984540054;
  double n = double(trials), p = double(successes) / n;
  return (z / (1.0 + z * z / n)) * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n));
}

// Chi-square critical value via the Wilson-Hilferty cube approximation.
inline double chi2_critical(uint32_t df, double significance) {
  if (df == 0) throw std::invalid_argument("chi2_critical: df = 0");
  // z quantile for the upper tail; only the significances used by the suite.
  double z;
  if (significance == 0.01) z = 2.326347874040841;
  else if (significance == 0.05) z = 1.6448536269514722;
  else throw std::invalid_argument("chi2_critical: unsupported significance");
  double d = double(df);
  double t = 1.0 - 2.0 / (9.0 * d) + z * std::sqrt(2.0 / (9.0 * d));
  return d * t * t * t;
}

struct Chi2Result {
  double stat = 0.0;
  uint32_t df = 0;
  double critical = 0.0;  // at the requested significance
  bool pass = false;      // stat <= critical
};

// Pearson chi-square of observed counts against expected counts (same total).
// Cells with expected == 0 must have observed == 0; they are excluded from df.
inline Chi2Result chi_square(const std::vector<uint64_t>& observed,
                             const std::vector<double>& expected,
                             double significance = 0.01) {
  if (observed.size() != expected.size())
    throw std::invalid_argument("chi_square: size mismatch");
  Chi2Result res;
  uint32_t cells = 0;
  for (size_t i = 0; i < observed.size(); i++) {
    if (expected[i] <= 0.0) {
      if (observed[i] != 0) {
        res.stat = std::numeric_limits<double>::infinity();
        cells++;
      }
      continue;
    }
    double d = double(observed[i]) - expected[i];
    res.stat += d * d / expected[i];
    cells++;
  }
  if (cells < 2) throw std::invalid_argument("chi_square: fewer than 2 live cells");
  res.df = cells - 1;
  res.critical = chi2_critical(res.df, significance);
  res.pass = res.stat <= res.critical;
  return res;
}

// Exact total variation distance between two pmfs on a shared support.
inline double exact_tv(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw std::invalid_argument("exact_tv: size mismatch");
  double s = 0.0;
  for (size_t i = 0; i < p.size(); i++) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

// ---------- dual-space block marginal ----------

// Law of a single dual sample h in F2^d: a hidden uniform a in F2^d is drawn
// and h is uniform in the orthogonal space of {a}. By symmetry Pr[h] only
// depends on [h = 0]; exact for k = l = 1.
//   Pr[h = 0]  = 2^-2d + (1 - 2^-d) 2^-(d-1)
//   Pr[h != 0] = 2^-2d + (2^{d-1} - 1) 2^-d 2^-(d-1)
inline double dual_block_marginal_tv_analytic(uint32_t d) {
  double u = std::ldexp(1.0, -int(d));
  return u - u * u;  // simplification of sum_h |Pr[h] - 2^-d| / 2
}

// Same quantity by brute-force enumeration over (a, h); d <= 12 or so.
inline double dual_block_marginal_tv_enumerated(uint32_t d) {
  if (d > 12) throw std::invalid_argument("dual_block_marginal_tv_enumerated: d too large");
  uint64_t n = uint64_t(1) << d;
  std::vector<double> pr(n, 0.0);
  for (uint64_t a = 0; a < n; a++) {
    // h uniform over the kernel of <a, .>
    uint64_t ksize = a == 0 ? n : n / 2;
    for (uint64_t h = 0; h < n; h++)
      if (std::popcount(a & h) % 2 == 0) pr[h] += 1.0 / double(n) / double(ksize);
  }
  double tv = 0.0;
  for (uint64_t h = 0; h < n; h++) tv += std::abs(pr[h] - 1.0 / double(n));
  return 0.5 * tv;
}

// Guarded alias for laws written out as explicit pmf vectors.
inline double exact_tv_tiny(const std::vector<double>& p,
                            const std::vector<double>& q) {
  if (p.size() > (size_t(1) << 24))
    throw std::invalid_argument("exact_tv_tiny: support too large");
  return exact_tv(p, q);
}

// ---------- distinguisher advantage ----------

struct AdvantageReport {
  std::string test;
  std::string params;
  uint64_t samples_per_arm = 0;
  double rate_yes = 0.0;
  double rate_no = 0.0;
  double advantage = 0.0;
  double ci95 = 0.0;  // sum of the two arms' Wilson half-widths

  std::string to_json() const {
    nlohmann::json j;
    j["test"] = test;
    j["params"] = params;
    j["samples"] = samples_per_arm;
    j["rate_yes"] = rate_yes;
    j["rate_no"] = rate_no;
    j["advantage"] = advantage;
    j["ci95"] = ci95;
    return j.dump();
  }
};

namespace stat_detail {

inline AdvantageReport make_report(std::string test, uint64_t n_samples,
                                   uint64_t acc_yes, uint64_t acc_no) {
  AdvantageReport rep;
  rep.test = std::move(test);
  rep.samples_per_arm = n_samples;
  rep.rate_yes = double(acc_yes) / double(n_samples);
  rep.rate_no = double(acc_no) / double(n_samples);
  rep.advantage = std::abs(rep.rate_yes - rep.rate_no);
  rep.ci95 = wilson_halfwidth(acc_yes, n_samples) + wilson_halfwidth(acc_no, n_samples);
  return rep;
}

}  // namespace stat_detail

// Acceptance-rate gap of a distinguisher over two instance samplers, with
// independent randomness streams per arm.
inline AdvantageReport measure_advantage(
    const Distinguisher& dist,
    const std::function<PlantedInstance(Rng&)>& yes_sampler,
    const std::function<PlantedInstance(Rng&)>& no_sampler,
    uint64_t n_samples, Rng& rng) {
  if (n_samples < 100)
    throw std::invalid_argument("measure_advantage: need >= 100 samples per arm");
  Rng yes_rng = rng.fork(), no_rng = rng.fork();
  uint64_t acc_yes = 0, acc_no = 0;
  for (uint64_t i = 0; i < n_samples; i++) {
    PlantedInstance yi = yes_sampler(yes_rng);
    if (dist.accept(yi.as, yi.y)) acc_yes++;
    PlantedInstance ni = no_sampler(no_rng);
    if (dist.accept(ni.as, ni.y)) acc_no++;
  }
  return stat_detail::make_report(dist.name, n_samples, acc_yes, acc_no);
}

inline AdvantageReport measure_dual_advantage(
    const DualDistinguisher& dist,
    const std::function<DualInstance(Rng&)>& yes_sampler,
    const std::function<DualInstance(Rng&)>& no_sampler,
    uint64_t n_samples, Rng& rng) {
  if (n_samples < 100)
    throw std::invalid_argument("measure_dual_advantage: need >= 100 samples per arm");
  Rng yes_rng = rng.fork(), no_rng = rng.fork();
  uint64_t acc_yes = 0, acc_no = 0;
  for (uint64_t i = 0; i < n_samples; i++) {
    DualInstance yi = yes_sampler(yes_rng);
    if (dist.accept(yi.hs, yi.zs)) acc_yes++;
    DualInstance ni = no_sampler(no_rng);
    if (dist.accept(ni.hs, ni.zs)) acc_no++;
  }
  return stat_detail::make_report(dist.name, n_samples, acc_yes, acc_no);
}

// ---------- PKE security hybrids ----------

// Unified hybrid output: k+1 public matrices (the last one is the Y slot)
// and k+1 ciphertext matrices. The chain walks an encryption of 0 to an
// encryption of 1.
struct HybridSample {
  MatrixTuple pub{0, 0};
  std::vector<BitMatrix> ct;
};

using HybridSampler = HybridSample (*)(const Params&, Rng&);

namespace hybrid_detail {

// encryption of 0: honest keys, honest ciphertext
inline HybridSample hyb1(const Params& p, Rng& rng) {
  KeyPair kp = keygen(p, rng);
  Ciphertext c = encrypt(kp.pk, false, rng);
  HybridSample h;
  h.pub = std::move(kp.pk.as);
  h.pub.push_back(kp.pk.y);
  h.ct = std::move(c.cs);
  return h;
}

// Y replaced by a uniform matrix; after renaming A_{k+1} = Y this is just
// k+1 uniform matrices with block products against a fresh low-rank R.
// The renamed and un-renamed hybrids are this one code path.
inline HybridSample hyb3(const Params& p, Rng& rng) {
  require_valid(p);
  HybridSample h;
  h.pub = MatrixTuple(p.n, p.n);
  for (uint32_t i = 0; i <= p.k; i++)
    h.pub.push_back(sample_uniform(p.n, p.n, rng));
  BlockIpContext ctx(p.n, p.t);
  BitMatrix r = sample_rank_at_most(p.n, p.r, rng);
  for (uint32_t i = 0; i <= p.k; i++)
    h.ct.push_back(block_ip(ctx, r, h.pub[i]));
  return h;
}

// block products replaced by uniform matrices
inline HybridSample hyb4(const Params& p, Rng& rng) {
  require_valid(p);
  HybridSample h;
  h.pub = MatrixTuple(p.n, p.n);
  for (uint32_t i = 0; i <= p.k; i++)
    h.pub.push_back(sample_uniform(p.n, p.n, rng));
  for (uint32_t i = 0; i <= p.k; i++)
    h.ct.push_back(sample_uniform(p.t, p.t, rng));
  return h;
}

// encryption of 1: honest keys, uniform ciphertext
inline HybridSample hyb5(const Params& p, Rng& rng) {
  KeyPair kp = keygen(p, rng);
  Ciphertext c = encrypt(kp.pk, true, rng);
  HybridSample h;
  h.pub = std::move(kp.pk.as);
  h.pub.push_back(kp.pk.y);
  h.ct = std::move(c.cs);
  return h;
}

}  // namespace hybrid_detail

// The five hybrid samplers in chain order. Hybrids 2 and 3 are the same
// function by construction (the renaming step changes nothing observable),
// so the array holds the same pointer twice.
inline std::array<HybridSampler, 5> hybrid_chain_pke(const Params& p) {
  require_valid(p);
  return {&hybrid_detail::hyb1, &hybrid_detail::hyb3, &hybrid_detail::hyb3,
          &hybrid_detail::hyb4, &hybrid_detail::hyb5};
}

// ---------- leftover-hash-lemma battery ----------

// Hashing experiment on one block: seeds h_1..h_l are uniform in F2^{b^2}
// (b = n/t), the source is one uniform block Y, and the extracted output is
// z with z_m = <h_m, vec Y>. The yes arm carries the real z, the no arm a
// uniform one. A fixed battery of tests is evaluated on both arms and the
// largest acceptance-rate gap is reported:
//   zero-output    accept iff z = 0
//   parity         accept iff popcount(z) even
//   solvability    accept iff z lies in the span of the seed rows
//   learned-set    accept iff z is in the set of outputs seen more often
//                  in the yes arm (its gap equals the empirical TV)
// degenerate_zero_y forces Y = 0 (a source with no entropy), which the
// zero-output test detects immediately.
inline AdvantageReport lhl_empirical(uint32_t n, uint32_t t, uint32_t l,
                                     Rng& rng, uint64_t n_samples,
                                     bool degenerate_zero_y = false) {
  BlockIpContext geometry(n, t);
  (void)geometry;
  if (l == 0 || l > 20)
    throw std::invalid_argument("lhl_empirical: l outside [1,20]");
  if (n_samples < 100)
    throw std::invalid_argument("lhl_empirical: need >= 100 samples per arm");
  uint32_t b = n / t;
  uint32_t d = b * b;

  uint64_t hist_cells = uint64_t(1) << l;
  std::vector<uint64_t> hist_yes(hist_cells, 0), hist_no(hist_cells, 0);
  uint64_t t1_yes = 0, t1_no = 0, t2_yes = 0, t2_no = 0, t3_yes = 0, t3_no = 0;

  auto solvable = [&](const BitMatrix& hmat, const BitVector& z) {
    return solve(hmat, z).has_value();
  };

  Rng yes_rng = rng.fork(), no_rng = rng.fork();
  for (uint64_t it = 0; it < n_samples; it++) {
    // yes arm
    {
      BitMatrix hmat = sample_uniform(l, d, yes_rng);
      BitVector y = degenerate_zero_y ? BitVector(d)
                                      : sample_uniform_vector(d, yes_rng);
      BitVector z(l);
      uint64_t zbits = 0;
      for (uint32_t m = 0; m < l; m++) {
        bool bit = dot(hmat.row_vector(m), y);
        z.set(m, bit);
        zbits |= uint64_t(bit) << m;
      }
      if (z.is_zero()) t1_yes++;
      if (z.popcount() % 2 == 0) t2_yes++;
      if (solvable(hmat, z)) t3_yes++;
      hist_yes[zbits]++;
    }
    // no arm
    {
      BitMatrix hmat = sample_uniform(l, d, no_rng);
      BitVector z = sample_uniform_vector(l, no_rng);
      uint64_t zbits = 0;
      for (uint32_t m = 0; m < l; m++) zbits |= uint64_t(z.get(m)) << m;
      if (z.is_zero()) t1_no++;
      if (z.popcount() % 2 == 0) t2_no++;
      if (solvable(hmat, z)) t3_no++;
      hist_no[zbits]++;
    }
  }

  AdvantageReport best = stat_detail::make_report("lhl-zero-output", n_samples, t1_yes, t1_no);
  AdvantageReport parity = stat_detail::make_report("lhl-parity", n_samples, t2_yes, t2_no);
  if (parity.advantage > best.advantage) best = parity;
  AdvantageReport solv = stat_detail::make_report("lhl-solvability", n_samples, t3_yes, t3_no);
  if (solv.advantage > best.advantage) best = solv;

  uint64_t set_yes = 0, set_no = 0;
  for (uint64_t c = 0; c < hist_cells; c++) {
    if (hist_yes[c] > hist_no[c]) {
      set_yes += hist_yes[c];
      set_no += hist_no[c];
    }
  }
  AdvantageReport learned = stat_detail::make_report("lhl-learned-set", n_samples, set_yes, set_no);
  if (learned.advantage > best.advantage) best = learned;

  best.params = "n=" + std::to_string(n) + " t=" + std::to_string(t) +
                " l=" + std::to_string(l) +
                (degenerate_zero_y ? " degenerate" : "");
  return best;
}

}  // namespace mrk
