#pragma once

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <random>

#include "CLI11.hpp"

#include "attacks.hpp"
#include "presets.hpp"
#include "reductions.hpp"
#include "serial.hpp"
#include "stattest.hpp"

namespace mrk {

// exit codes: 0 success, 2 bad parameters, 3 I/O failure, 4 malformed file,
// 5 key/ciphertext mismatch
namespace cli_detail {

constexpr int kOk = 0;
constexpr int kBadParams = 2;
constexpr int kIo = 3;
constexpr int kFormat = 4;
constexpr int kMismatch = 5;

// --seed takes 64 hex chars; without it 32 bytes of OS entropy are drawn and
// echoed to stderr so the run can be reproduced.
inline Rng make_rng(const std::string& seed_hex) {
  if (!seed_hex.empty()) return Rng::from_hex(seed_hex);
  std::random_device rd;
  Rng::Seed s;
  for (auto& b : s) b = uint8_t(rd());
  std::ostringstream os;
  for (uint8_t b : s)
    os << std::hex << std::setw(2) << std::setfill('0') << int(b);
  std::cerr << "seed: " << os.str() << "\n";
  return Rng(s);
}

inline std::string bits_to_string(const BitVector& v) {
  std::string out(v.size(), '0');
  for (uint32_t i = 0; i < v.size(); i++)
    if (v.get(i)) out[i] = '1';
  return out;
}

// shared --preset/--n/--k/--r/--t block; explicit values override the preset
struct ShapeOpts {
  std::string preset;
  int64_t n = -1, k = -1, r = -1, t = -1;

  void attach(CLI::App* sub) {
    sub->add_option("--preset", preset,
                    "parameter preset: desk64, toy8, regime1, regime2, "
                    "regime3 (regimes need --n)");
    sub->add_option("--n", n, "matrix dimension")->check(CLI::NonNegativeNumber);
    sub->add_option("--k", k, "number of public matrices")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--r", r, "planted rank bound")->check(CLI::NonNegativeNumber);
    sub->add_option("--t", t, "block count per axis")
        ->check(CLI::NonNegativeNumber);
  }

  Params resolve(bool strict_default) const {
    Params base = preset_desk64().params;
    bool strict = strict_default;
    if (!preset.empty()) {
      Preset ps = preset_by_name(preset, n > 0 ? uint32_t(n) : 0);
      base = ps.params;
      strict = ps.params.strict;
    }
    return Params::make(n >= 0 ? uint32_t(n) : base.n,
                        k >= 0 ? uint32_t(k) : base.k,
                        r >= 0 ? uint32_t(r) : base.r,
                        t >= 0 ? uint32_t(t) : base.t, strict);
  }
};

inline int cmd_keygen(const ShapeOpts& shape, const std::string& seed,
                      const std::string& out_pk, const std::string& out_sk) {
  Params p = shape.resolve(/*strict_default=*/true);
  std::cerr << "parameters: n=" << p.n << " k=" << p.k << " r=" << p.r
            << " t=" << p.t << " tau=" << p.tau << "\n";
  ParamReport rep = validate(p);
  std::cerr << rep.to_string();
  if (!rep.ok) return kBadParams;
  Rng rng = make_rng(seed);
  KeyPair kp = keygen(p, rng);
  save_public_key(out_pk, kp.pk);
  save_secret_key(out_sk, kp.sk);
  std::cout << "wrote " << out_pk << " and " << out_sk << "\n";
  return kOk;
}

inline int cmd_encrypt(const std::string& pk_path, int bit,
                       const std::string& out, const std::string& seed) {
  PublicKey pk = load_public_key(pk_path);
  Rng rng = make_rng(seed);
  Ciphertext ct = encrypt(pk, bit != 0, rng);
  save_ciphertext(out, ct);
  std::cout << "wrote " << out << "\n";
  return kOk;
}

inline int cmd_decrypt(const std::string& sk_path, const std::string& in) {
  SecretKey sk = load_secret_key(sk_path);
  Ciphertext ct = load_ciphertext(in);
  if (ct.k != sk.params.k || ct.t != sk.params.t) {
    std::cerr << "mismatch: ciphertext has k=" << ct.k << " t=" << ct.t
              << " but key expects k=" << sk.params.k << " t=" << sk.params.t
              << "\n";
    return kMismatch;
  }
  std::cout << (decrypt(sk, ct) ? 1 : 0) << "\n";
  return kOk;
}

inline int cmd_attack(const std::string& attack, const std::string& inst_path,
                      const ShapeOpts& shape, uint64_t trials, uint64_t budget,
                      uint32_t threads, bool json, const std::string& seed) {
  Rng rng = make_rng(seed);
  auto run_one = [&](const PlantedInstance& inst) -> AttackResult {
    if (attack == "brute-s")
      return budget ? brute_force_s(inst, budget) : brute_force_s(inst);
    if (attack == "brute-e")
      return budget ? brute_force_E(inst, budget) : brute_force_E(inst);
    if (attack == "kernel")
      return kernel_attack(inst, rng, budget ? budget : 4096, threads);
    return ks_linearization(inst, budget ? budget : 64);
  };
  Params p;
  std::vector<AttackResult> runs;
  nlohmann::json arr = nlohmann::json::array();
  auto record = [&](const PlantedInstance& inst) {
    AttackResult res = run_one(inst);
    if (json) {
      nlohmann::json j = {{"attack", attack},
                          {"n", inst.params.n},
                          {"k", inst.params.k},
                          {"r", inst.params.r},
                          {"t", inst.params.t},
                          {"found", res.found.has_value()},
                          {"iterations", res.iterations},
                          {"trials", res.trials},
                          {"wall_time_s", res.wall_time_s},
                          {"note", res.note}};
      if (res.found) j["secret"] = bits_to_string(*res.found);
      arr.push_back(std::move(j));
    }
    runs.push_back(std::move(res));
  };
  if (!inst_path.empty()) {
    PlantedInstance inst = load_instance(inst_path);
    p = inst.params;
    for (uint64_t i = 0; i < trials; i++) record(inst);
  } else {
    p = shape.resolve(/*strict_default=*/false);
    for (uint64_t i = 0; i < trials; i++) record(sample_planted(p, rng));
  }
  if (json) {
    std::cout << arr.dump(2) << "\n";
  } else {
    std::cout << benchmark_csv_header() << "\n"
              << benchmark_csv_row(p, attack, runs) << "\n";
  }
  return kOk;
}

inline int cmd_estimate(const ShapeOpts& shape, double omega, bool json) {
  Params p = shape.resolve(/*strict_default=*/false);
  std::vector<ComplexityEstimate> est = estimate_all(p, omega);
  // classical attack ranking first, then quantum and lower-bound reference
  // rows, inapplicable rows last
  std::stable_sort(est.begin(), est.end(),
                   [](const ComplexityEstimate& a, const ComplexityEstimate& b) {
                     if (a.applicable != b.applicable) return a.applicable;
                     bool aref = a.quantum || a.lower_bound;
                     bool bref = b.quantum || b.lower_bound;
                     if (aref != bref) return bref;
                     return a.log2_cost < b.log2_cost;
                   });
  if (json) {
    std::cout << estimates_to_json(est).dump(2) << "\n";
    return kOk;
  }
  std::cout << "n=" << p.n << " k=" << p.k << " r=" << p.r
            << " omega=" << omega << "\n";
  std::cout << std::left << std::setw(26) << "attack" << std::right
            << std::setw(10) << "log2 cost"
            << "  flags\n";
  for (const auto& e : est) {
    std::cout << std::left << std::setw(26) << e.attack << std::right;
    if (e.applicable) {
      std::cout << std::setw(10) << std::fixed << std::setprecision(2)
                << e.log2_cost;
    } else {
      std::cout << std::setw(10) << "n/a";
    }
    std::string flags;
    if (e.implemented) flags += " implemented";
    if (e.lower_bound) flags += " lower-bound";
    if (e.quantum) flags += " quantum";
    std::cout << " " << (flags.empty() ? " -" : flags) << "  " << e.reason
              << "\n";
  }
  return kOk;
}

// ---------- selftest ----------

struct SelfCheck {
  std::string name;
  std::function<bool()> run;
};

inline void selftest_fast_checks(std::vector<SelfCheck>& checks) {
  checks.push_back({"parameter margins (desk64 strict)", [] {
    return validate(preset_desk64().params).strict_ok;
  }});

  checks.push_back({"pke roundtrip, zero bit", [] {
    Rng rng(20260819);
    KeyPair kp = keygen(preset_desk64().params, rng);
    for (int i = 0; i < 200; i++)
      if (decrypt(kp.sk, encrypt(kp.pk, false, rng))) return false;
    return true;
  }});

  checks.push_back({"pke roundtrip, one bit", [] {
    Rng rng(20260820);
    KeyPair kp = keygen(preset_desk64().params, rng);
    int good = 0;
    for (int i = 0; i < 200; i++)
      if (decrypt(kp.sk, encrypt(kp.pk, true, rng))) good++;
    return good >= 199;
  }});

  checks.push_back({"serialization roundtrips", [] {
    namespace fs = std::filesystem;
    Rng rng(20260821);
    fs::path dir = fs::temp_directory_path() / "mrk-selftest";
    fs::create_directories(dir);
    Params p = preset_toy8().params;
    KeyPair kp = keygen(p, rng);
    Ciphertext ct = encrypt(kp.pk, true, rng);
    PlantedInstance inst = sample_planted(p, rng);
    save_public_key((dir / "pk.bin").string(), kp.pk);
    save_secret_key((dir / "sk.bin").string(), kp.sk);
    save_ciphertext((dir / "ct.bin").string(), ct);
    save_instance((dir / "inst.bin").string(), inst);
    PublicKey pk2 = load_public_key((dir / "pk.bin").string());
    SecretKey sk2 = load_secret_key((dir / "sk.bin").string());
    Ciphertext ct2 = load_ciphertext((dir / "ct.bin").string());
    PlantedInstance in2 = load_instance((dir / "inst.bin").string());
    bool ok = pk2.as == kp.pk.as && pk2.y == kp.pk.y && sk2.s == kp.sk.s &&
              ct2.cs.size() == ct.cs.size() && in2.as == inst.as &&
              in2.y == inst.y && in2.witness && in2.witness->s == inst.witness->s;
    for (size_t i = 0; ok && i < ct.cs.size(); i++) ok = ct2.cs[i] == ct.cs[i];
    fs::remove_all(dir);
    return ok;
  }});

  checks.push_back({"duality reduction exactness", [] {
    Rng rng(20260822);
    Params p = Params::make(16, 4, 1, 4, false);
    BlockIpContext ctx(16, 4);
    for (int it = 0; it < 25; it++) {
      PlantedInstance inst = sample_planted(p, rng);
      DualInstance di = duality_reduce(inst, 2, rng);
      for (uint32_t j = 0; j < di.l; j++) {
        for (uint32_t i = 0; i < p.k; i++)
          if (!block_ip(ctx, di.hs[j], inst.as[i]).is_zero()) return false;
        if (!(di.zs[j] == block_ip(ctx, di.hs[j], inst.witness->e)))
          return false;
      }
    }
    return true;
  }});

  checks.push_back({"goldreich-levin list decoding", [] {
    Rng rng(20260823);
    for (int it = 0; it < 5; it++) {
      BitVector s = sample_uniform_vector(16, rng);
      auto pred = [&](const BitVector& x) { return dot(s, x); };
      GlConfig cfg;
      cfg.epsilon = 0.5;
      std::vector<BitVector> got = goldreich_levin(pred, 16, cfg, rng);
      if (std::find(got.begin(), got.end(), s) == got.end()) return false;
    }
    return true;
  }});

  checks.push_back({"kernel attack recovery", [] {
    Rng rng(20260824);
    Params p = Params::make(24, 8, 2, 4, false);
    for (int it = 0; it < 20; it++) {
      PlantedInstance inst = sample_planted(p, rng);
      AttackResult res = kernel_attack(inst, rng, 256);
      if (!res.found || !verify_solution(inst, *res.found)) return false;
    }
    return true;
  }});

  checks.push_back({"ks linearization recovery", [] {
    Rng rng(20260825);
    Params p = Params::make(24, 2, 2, 2, false);
    int good = 0;
    for (int it = 0; it < 20; it++) {
      PlantedInstance inst = sample_planted(p, rng);
      AttackResult res = ks_linearization(inst);
      if (res.found && verify_solution(inst, *res.found)) good++;
    }
    return good >= 18;
  }});

  checks.push_back({"brute force agreement", [] {
    Rng rng(20260826);
    Params p = Params::make(3, 2, 1, 3, false);
    for (int it = 0; it < 10; it++) {
      PlantedInstance inst = it % 2 == 0 ? sample_planted(p, rng)
                                         : sample_uniform_instance(p, rng);
      if (brute_force_E(inst).found.has_value() !=
          brute_force_s(inst).found.has_value())
        return false;
    }
    return true;
  }});

  checks.push_back({"estimator ranking (desk64)", [] {
    auto est = estimate_all(preset_desk64().params);
    return cheapest_attack(est)->attack == "kernel" &&
           cheapest_attack(est, true)->attack == "kernel";
  }});

  checks.push_back({"dual consistency oracle separation", [] {
    Rng rng(20260827);
    DualDistinguisher oracle = make_dual_consistency_oracle(8, 4, 1);
    int yes = 0, no = 0;
    for (int it = 0; it < 100; it++) {
      DualInstance y = sample_dual_yes(8, 4, 1, 4, rng);
      if (oracle.accept(y.hs, y.zs)) yes++;
      DualInstance n = sample_dual_no(8, 4, 1, 4, rng);
      if (oracle.accept(n.hs, n.zs)) no++;
    }
    return yes == 100 && no <= 10;
  }});

  checks.push_back({"extraction uniformity", [] {
    Rng rng(20260828);
    AdvantageReport rep = lhl_empirical(16, 4, 1, rng, 100000);
    return rep.advantage <= 0.05;
  }});
}

inline void selftest_full_checks(std::vector<SelfCheck>& checks) {
  checks.push_back({"pke roundtrip, zero bit x2000", [] {
    Rng rng(20260829);
    KeyPair kp = keygen(preset_desk64().params, rng);
    for (int i = 0; i < 2000; i++)
      if (decrypt(kp.sk, encrypt(kp.pk, false, rng))) return false;
    return true;
  }});

  checks.push_back({"advantage harness calibration", [] {
    Rng rng(20260830);
    Params p = preset_toy8().params;
    auto planted = [p](Rng& r) { return sample_planted(p, r); };
    auto uniform = [p](Rng& r) { return sample_uniform_instance(p, r); };
    Rng coin_rng = rng.fork();
    AdvantageReport coin = measure_advantage(make_coin_flip(coin_rng), planted,
                                             uniform, 2000, rng);
    if (coin.advantage > coin.ci95 + 0.02) return false;
    PlantedInstance probe = sample_planted(p, rng);
    auto replant = [p, w = *probe.witness](Rng& r) {
      PlantedInstance inst;
      inst.params = p;
      inst.as = MatrixTuple(p.n, p.n);
      for (uint32_t i = 0; i < p.k; i++)
        inst.as.push_back(sample_uniform(p.n, p.n, r));
      inst.y = tuple_combination(inst.as, w.s);
      add_in_place(inst.y, sample_rank_at_most(p.n, p.r, r));
      return inst;
    };
    AdvantageReport wc = measure_advantage(
        make_witness_cheating(probe.witness->s, p.r), replant, uniform, 500,
        rng);
    return wc.advantage >= 0.95;
  }});

  checks.push_back({"pred success tracks advantage", [] {
    Rng rng(20260831);
    Params p = preset_toy8().params;
    PlantedInstance inst = sample_planted(p, rng);
    Rng blend_rng = rng.fork();
    Distinguisher half = make_blended(
        make_witness_cheating(inst.witness->s, p.r), 0.5, blend_rng);
    uint64_t hits = 0;
    const uint64_t n = 4000;
    for (uint64_t i = 0; i < n; i++) {
      BitVector x = sample_uniform_vector(p.k, rng);
      if (predict_inner_product(half, inst, x, rng) == dot(inst.witness->s, x))
        hits++;
    }
    double success = double(hits) / double(n);
    return std::abs(success - 0.75) <= 0.04;
  }});

  checks.push_back({"search from decision", [] {
    Rng rng(20260832);
    Params p = Params::make(8, 8, 1, 4, false);
    int good = 0;
    for (int it = 0; it < 10; it++) {
      PlantedInstance inst = sample_planted(p, rng);
      Distinguisher oracle = make_witness_cheating(inst.witness->s, p.r);
      std::optional<BitVector> got = search_from_decision(oracle, inst, 1.0, rng);
      if (got && verify_solution(inst, *got)) good++;
    }
    return good >= 8;
  }});

  checks.push_back({"hybrid chain endpoints", [] {
    Params p = Params::make(8, 2, 1, 4, false);
    auto chain = hybrid_chain_pke(p);
    Rng a(20260833), b(20260833);
    HybridSample h0 = chain[0](p, a);
    KeyPair kp = keygen(p, b);
    Ciphertext ct = encrypt(kp.pk, false, b);
    for (uint32_t i = 0; i < p.k; i++)
      if (!(h0.pub[i] == kp.pk.as[i])) return false;
    if (!(h0.pub[p.k] == kp.pk.y)) return false;
    for (uint32_t i = 0; i <= p.k; i++)
      if (!(h0.ct[i] == ct.cs[i])) return false;
    return chain[1] == chain[2];
  }});

  checks.push_back({"kernel attack, two threads", [] {
    Rng rng(20260834);
    Params p = Params::make(24, 8, 2, 4, false);
    PlantedInstance inst = sample_planted(p, rng);
    AttackResult res = kernel_attack(inst, rng, 512, 2);
    return res.found && verify_solution(inst, *res.found);
  }});

  checks.push_back({"dual block law, exact", [] {
    double enumd = dual_block_marginal_tv_enumerated(4);
    double analytic = dual_block_marginal_tv_analytic(4);
    return std::abs(enumd - 15.0 / 256.0) < 1e-12 &&
           std::abs(analytic - enumd) < 1e-12;
  }});
}

inline int cmd_selftest(const std::string& level) {
  if (level != "fast" && level != "full")
    throw std::invalid_argument("selftest: level must be fast or full");
  std::vector<SelfCheck> checks;
  selftest_fast_checks(checks);
  if (level == "full") selftest_full_checks(checks);
  int passed = 0;
  for (const auto& c : checks) {
    bool ok = false;
    try {
      ok = c.run();
    } catch (const std::exception& e) {
      std::cout << "FAIL - " << c.name << " (exception: " << e.what() << ")\n";
      continue;
    }
    std::cout << (ok ? "ok - " : "FAIL - ") << c.name << "\n";
    if (ok) passed++;
  }
  std::cout << "selftest: " << passed << "/" << checks.size() << " passed\n";
  return passed == int(checks.size()) ? kOk : 1;
}

}  // namespace cli_detail

// Entry point shared by the binary and the tests. args excludes argv[0].
inline int run_cli(const std::vector<std::string>& args) {
  using namespace cli_detail;
  CLI::App app{"MinRank toolkit over F2"};
  app.require_subcommand(1);

  ShapeOpts kg_shape, at_shape, es_shape;
  std::string kg_seed, kg_out_pk = "pk.bin", kg_out_sk = "sk.bin";
  CLI::App* kg = app.add_subcommand("keygen", "generate a key pair");
  kg_shape.attach(kg);
  kg->add_option("--seed", kg_seed, "64 hex chars of seed");
  kg->add_option("--out-pk", kg_out_pk, "public key output path");
  kg->add_option("--out-sk", kg_out_sk, "secret key output path");

  std::string en_pk, en_out = "ct.bin", en_seed;
  int en_bit = 0;
  CLI::App* en = app.add_subcommand("encrypt", "encrypt one bit");
  en->add_option("--pk", en_pk, "public key path")->required();
  en->add_option("--bit", en_bit, "plaintext bit")
      ->required()
      ->check(CLI::Range(0, 1));
  en->add_option("--out", en_out, "ciphertext output path");
  en->add_option("--seed", en_seed, "64 hex chars of seed");

  std::string de_sk, de_in;
  CLI::App* de = app.add_subcommand("decrypt", "decrypt a ciphertext");
  de->add_option("--sk", de_sk, "secret key path")->required();
  de->add_option("--in", de_in, "ciphertext path")->required();

  std::string at_name, at_inst, at_seed;
  uint64_t at_trials = 1, at_budget = 0;
  uint32_t at_threads = 1;
  bool at_json = false;
  CLI::App* at = app.add_subcommand("attack", "run an attack");
  at->add_option("--attack", at_name, "attack name")
      ->required()
      ->check(CLI::IsMember({"brute-s", "brute-e", "kernel", "ks-lin"}));
  at->add_option("--instance", at_inst, "attack a serialized instance file");
  at_shape.attach(at);
  at->add_option("--trials", at_trials, "number of attack runs")
      ->check(CLI::PositiveNumber);
  at->add_option("--budget", at_budget,
                 "iteration/restart budget (0 = per-attack default)");
  at->add_option("--threads", at_threads, "worker threads (kernel attack)")
      ->check(CLI::PositiveNumber);
  at->add_flag("--json", at_json, "JSON output");
  at->add_option("--seed", at_seed, "64 hex chars of seed");

  double es_omega = 2.81;
  bool es_json = false;
  CLI::App* es = app.add_subcommand("estimate", "closed-form attack costs");
  es_shape.attach(es);
  es->add_option("--omega", es_omega, "matrix multiplication exponent");
  es->add_flag("--json", es_json, "JSON output");

  std::string st_level = "fast";
  CLI::App* st = app.add_subcommand("selftest", "run built-in checks");
  st->add_option("--level", st_level, "fast or full")
      ->check(CLI::IsMember({"fast", "full"}));

  std::vector<const char*> argv;
  argv.push_back("mrk");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kBadParams;
  }

  try {
    if (kg->parsed()) return cmd_keygen(kg_shape, kg_seed, kg_out_pk, kg_out_sk);
    if (en->parsed()) return cmd_encrypt(en_pk, en_bit, en_out, en_seed);
    if (de->parsed()) return cmd_decrypt(de_sk, de_in);
    if (at->parsed())
      return cmd_attack(at_name, at_inst, at_shape, at_trials, at_budget,
                        at_threads, at_json, at_seed);
    if (es->parsed()) return cmd_estimate(es_shape, es_omega, es_json);
    if (st->parsed()) return cmd_selftest(st_level);
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kFormat;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return kBadParams;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadParams;
  }
  return kBadParams;
}

}  // namespace mrk
