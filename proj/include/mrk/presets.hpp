#pragma once

#include <cmath>

#include "minrank.hpp"

namespace mrk {

struct Preset {
  std::string name;
  Params params;
  std::string note;
};

// divisor of n closest to target (ties break toward the smaller divisor)
inline uint32_t nearest_divisor(uint32_t n, double target) {
  uint32_t best = 1;
  double best_gap = std::abs(target - 1.0);
  for (uint32_t d = 2; d <= n; d++) {
    if (n % d != 0) continue;
    double gap = std::abs(target - double(d));
    if (gap < best_gap) {
      best = d;
      best_gap = gap;
    }
  }
  return best;
}

// strict desk-scale default: every margin holds with room to spare
inline Preset preset_desk64() {
  return {"desk64", Params::make(64, 4, 3, 16, true),
          "desk-scale strict default"};
}

// deliberately weak shape where the reductions and attacks all bite
inline Preset preset_toy8() {
  return {"toy8", Params::make(8, 2, 1, 2, false),
          "weak toy shape for demos and oracle experiments"};
}

// t ~ sqrt(n), k ~ n/2, r ~ n^(1/4): correlation- and dual-margin driven
// family; the kernel attack dominates. Strict from n = 64 up.
inline Preset preset_regime1(uint32_t n) {
  if (n < 64) throw std::invalid_argument("regime1: needs n >= 64");
  uint32_t cl2 = ceil_log2(n);
  uint32_t t = nearest_divisor(n, std::sqrt(double(n)));
  uint32_t b = n / t;
  int64_t dual_room = int64_t(b) * b - 1 - cl2;
  int64_t corr_room = int64_t(t) - cl2 - 1;
  uint32_t k = std::min(uint32_t(0.49 * n),
                        dual_room > 0 ? uint32_t(dual_room / 2) : 1u);
  uint32_t r = std::min(uint32_t(0.9 * std::pow(double(n), 0.25)),
                        corr_room > 0 ? uint32_t(std::sqrt(double(corr_room)))
                                      : 1u);
  k = std::max(k, 1u);
  r = std::min(std::max(r, 1u), n);
  return {"regime1", Params::make(n, k, r, t, true),
          "t ~ sqrt(n), k ~ n/2, r ~ n^(1/4); kernel-dominant family"};
}

// t ~ sqrt(n / log n), k ~ n log n / 4, r ~ (n / log n)^(1/4): density pushed
// past the strict margins, kernel still cheapest with support-minors in the
// same growth class.
inline Preset preset_regime2(uint32_t n) {
  if (n < 16) throw std::invalid_argument("regime2: needs n >= 16");
  double lg = std::log2(double(n));
  uint32_t t = nearest_divisor(n, std::sqrt(double(n) / lg));
  uint32_t k = std::max(uint32_t(double(n) * lg / 4.0), 1u);
  uint32_t r = std::max(uint32_t(std::pow(double(n) / lg, 0.25)), 1u);
  return {"regime2", Params::make(n, k, std::min(r, n), t, false),
          "t ~ sqrt(n/log n), dense k ~ n log n / 4; kernel-dominant with "
          "support-minors in the same growth class"};
}

// t ~ log^6(n)/4096, k ~ n / (4 log n), few but huge blocks and large rank:
// linearization territory.
inline Preset preset_regime3(uint32_t n) {
  if (n < 16) throw std::invalid_argument("regime3: needs n >= 16");
  double lg = std::log2(double(n));
  uint32_t t = nearest_divisor(n, std::pow(lg, 6.0) / 4096.0);
  uint32_t k = std::max(uint32_t(double(n) / (4.0 * lg)), 1u);
  uint32_t r = std::max(uint32_t(std::pow(lg, 3.0) / 16.0), 1u);
  return {"regime3", Params::make(n, k, std::min(r, n), t, false),
          "large rank, few blocks; ks-xl-dominant family"};
}

// name lookup used by the command line; regime presets need the scale n
inline Preset preset_by_name(const std::string& name, uint32_t n = 0) {
  if (name == "desk64") return preset_desk64();
  if (name == "toy8") return preset_toy8();
  if (name == "regime1" || name == "regime2" || name == "regime3") {
    if (n == 0)
      throw std::invalid_argument("preset " + name + " needs an explicit n");
    if (name == "regime1") return preset_regime1(n);
    if (name == "regime2") return preset_regime2(n);
    return preset_regime3(n);
  }
  throw std::invalid_argument("unknown preset: " + name);
}

}  // namespace mrk
