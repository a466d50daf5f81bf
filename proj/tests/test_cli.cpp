#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "mrk/cli.hpp"

namespace fs = std::filesystem;
using namespace mrk;

namespace {

// run_cli with stdout captured; stderr is left alone (margin reports, seeds)
int run(const std::vector<std::string>& args, std::string* out = nullptr) {
  std::ostringstream ss;
  std::streambuf* old = std::cout.rdbuf(ss.rdbuf());
  int rc = -1;
  try {
    rc = run_cli(args);
  } catch (...) {
    std::cout.rdbuf(old);
    throw;
  }
  std::cout.rdbuf(old);
  if (out) *out = ss.str();
  return rc;
}

fs::path test_dir() {
  fs::path dir = fs::temp_directory_path() / "mrk-cli-tests";
  fs::create_directories(dir);
  return dir;
}

std::string hex_seed(uint8_t tag) {
  std::string s(64, '0');
  const char* digits = "0123456789abcdef";
  s[62] = digits[tag >> 4];
  s[63] = digits[tag & 15];
  return s;
}

std::vector<char> slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return std::vector<char>(std::istreambuf_iterator<char>(f),
                           std::istreambuf_iterator<char>());
}

}  // namespace

TEST(CliKeygen, RejectsBlockCountThatDoesNotDivideN) {
  EXPECT_EQ(run({"keygen", "--n", "10", "--t", "3"}), 2);
}

TEST(CliKeygen, RejectsStrictMarginViolations) {
  // r^2 = 16 swamps t - ceil(log2 n) = -2; strict mode refuses
  EXPECT_EQ(run({"keygen", "--n", "64", "--k", "16", "--r", "4", "--t", "4"}),
            2);
}

TEST(CliKeygen, IsDeterministicGivenASeed) {
  fs::path dir = test_dir();
  auto pk1 = dir / "det-pk1.bin", sk1 = dir / "det-sk1.bin";
  auto pk2 = dir / "det-pk2.bin", sk2 = dir / "det-sk2.bin";
  auto pk3 = dir / "det-pk3.bin", sk3 = dir / "det-sk3.bin";
  ASSERT_EQ(run({"keygen", "--seed", hex_seed(1), "--out-pk", pk1.string(),
                 "--out-sk", sk1.string()}),
            0);
  ASSERT_EQ(run({"keygen", "--seed", hex_seed(1), "--out-pk", pk2.string(),
                 "--out-sk", sk2.string()}),
            0);
  ASSERT_EQ(run({"keygen", "--seed", hex_seed(2), "--out-pk", pk3.string(),
                 "--out-sk", sk3.string()}),
            0);
  EXPECT_EQ(slurp(pk1), slurp(pk2));
  EXPECT_EQ(slurp(sk1), slurp(sk2));
  EXPECT_NE(slurp(pk1), slurp(pk3));
}

TEST(CliRoundTrip, EncryptThenDecryptRecoversBothBits) {
  fs::path dir = test_dir();
  auto pk = dir / "rt-pk.bin", sk = dir / "rt-sk.bin", ct = dir / "rt-ct.bin";
  ASSERT_EQ(run({"keygen", "--seed", hex_seed(3), "--out-pk", pk.string(),
                 "--out-sk", sk.string()}),
            0);
  for (const char* bit : {"0", "1"}) {
    ASSERT_EQ(run({"encrypt", "--pk", pk.string(), "--bit", bit, "--out",
                   ct.string(), "--seed", hex_seed(4)}),
              0);
    std::string out;
    ASSERT_EQ(run({"decrypt", "--sk", sk.string(), "--in", ct.string()}, &out),
              0);
    EXPECT_EQ(out, std::string(bit) + "\n");
  }
}

TEST(CliRoundTrip, MissingKeyFileIsAnIoError) {
  EXPECT_EQ(run({"encrypt", "--pk", "/nonexistent/pk.bin", "--bit", "0"}), 3);
}

TEST(CliRoundTrip, TruncatedCiphertextIsAFormatError) {
  fs::path dir = test_dir();
  auto pk = dir / "tr-pk.bin", sk = dir / "tr-sk.bin", ct = dir / "tr-ct.bin";
  ASSERT_EQ(run({"keygen", "--seed", hex_seed(5), "--out-pk", pk.string(),
                 "--out-sk", sk.string()}),
            0);
  ASSERT_EQ(run({"encrypt", "--pk", pk.string(), "--bit", "1", "--out",
                 ct.string(), "--seed", hex_seed(6)}),
            0);
  std::vector<char> bytes = slurp(ct);
  ASSERT_GT(bytes.size(), size_t(8));
  std::ofstream f(ct, std::ios::binary | std::ios::trunc);
  f.write(bytes.data(), std::streamsize(bytes.size() - 5));
  f.close();
  EXPECT_EQ(run({"decrypt", "--sk", sk.string(), "--in", ct.string()}), 4);
}

TEST(CliRoundTrip, ShapeMismatchBetweenKeyAndCiphertextIsReported) {
  fs::path dir = test_dir();
  auto pk = dir / "mm-pk.bin", sk = dir / "mm-sk.bin", ct = dir / "mm-ct.bin";
  auto sk2 = dir / "mm-sk2.bin", pk2 = dir / "mm-pk2.bin";
  ASSERT_EQ(run({"keygen", "--seed", hex_seed(7), "--out-pk", pk.string(),
                 "--out-sk", sk.string()}),
            0);
  ASSERT_EQ(run({"encrypt", "--pk", pk.string(), "--bit", "0", "--out",
                 ct.string(), "--seed", hex_seed(8)}),
            0);
  // toy8 keys expect k=2, t=2; the desk64 ciphertext has k=4, t=16
  ASSERT_EQ(run({"keygen", "--preset", "toy8", "--seed", hex_seed(9),
                 "--out-pk", pk2.string(), "--out-sk", sk2.string()}),
            0);
  EXPECT_EQ(run({"decrypt", "--sk", sk2.string(), "--in", ct.string()}), 5);
}

TEST(CliRoundTrip, WrongKeyOfTheRightShapeDecryptsToTheWrongBit) {
  fs::path dir = test_dir();
  auto pk = dir / "wk-pk.bin", sk = dir / "wk-sk.bin", ct = dir / "wk-ct.bin";
  auto pk2 = dir / "wk-pk2.bin", sk2 = dir / "wk-sk2.bin";
  ASSERT_EQ(run({"keygen", "--seed", hex_seed(10), "--out-pk", pk.string(),
                 "--out-sk", sk.string()}),
            0);
  ASSERT_EQ(run({"keygen", "--seed", hex_seed(11), "--out-pk", pk2.string(),
                 "--out-sk", sk2.string()}),
            0);
  ASSERT_EQ(run({"encrypt", "--pk", pk.string(), "--bit", "0", "--out",
                 ct.string(), "--seed", hex_seed(12)}),
            0);
  std::string out;
  // an unrelated secret leaves a full-rank residue, which reads as 1
  EXPECT_EQ(run({"decrypt", "--sk", sk2.string(), "--in", ct.string()}, &out),
            0);
  EXPECT_EQ(out, "1\n");
}

TEST(CliAttack, BruteForceRefusesOversizedSecretSpace) {
  EXPECT_EQ(run({"attack", "--attack", "brute-s", "--k", "40", "--seed",
                 hex_seed(13)}),
            2);
}

TEST(CliAttack, KsLinearizationRefusesUnderdeterminedShapes) {
  EXPECT_EQ(run({"attack", "--attack", "ks-lin", "--n", "8", "--k", "8", "--r",
                 "2", "--t", "2", "--seed", hex_seed(14)}),
            2);
}

TEST(CliAttack, KernelJsonReportsARecoveredSecret) {
  std::string out;
  ASSERT_EQ(run({"attack", "--attack", "kernel", "--n", "24", "--k", "8",
                 "--r", "2", "--t", "4", "--seed", hex_seed(15), "--json"},
                &out),
            0);
  nlohmann::json j = nlohmann::json::parse(out);
  ASSERT_TRUE(j.is_array());
  ASSERT_EQ(j.size(), size_t(1));
  EXPECT_TRUE(j[0]["found"].get<bool>());
  EXPECT_EQ(j[0]["secret"].get<std::string>().size(), size_t(8));
  EXPECT_EQ(j[0]["n"].get<int>(), 24);
}

TEST(CliAttack, RunsAgainstASerializedInstance) {
  fs::path dir = test_dir();
  auto inst_path = dir / "at-inst.bin";
  Rng rng(424242);
  PlantedInstance inst = sample_planted(Params::make(16, 4, 1, 2, false), rng);
  save_instance(inst_path.string(), inst);
  std::string out;
  ASSERT_EQ(run({"attack", "--attack", "kernel", "--instance",
                 inst_path.string(), "--seed", hex_seed(16)},
                &out),
            0);
  EXPECT_EQ(out.rfind("n,k,r,t,attack", 0), size_t(0));
  EXPECT_NE(out.find("16,4,1,2,kernel"), std::string::npos);
}

TEST(CliEstimate, RanksKernelCheapestAtTheDeskShape) {
  std::string out;
  ASSERT_EQ(run({"estimate", "--preset", "desk64", "--json"}, &out), 0);
  nlohmann::json j = nlohmann::json::parse(out);
  ASSERT_TRUE(j.is_array());
  EXPECT_EQ(j.size(), size_t(12));
  // sorted ascending with inapplicable rows last
  EXPECT_EQ(j[0]["attack"].get<std::string>(), "kernel");
  EXPECT_FALSE(j[11]["applicable"].get<bool>());
}

TEST(CliEstimate, SweepMatchesTheFourthRootLaw) {
  // cheapest classical exponent in the dense family grows like
  // n^(1/4) log2(n)^(3/4)
  for (uint32_t n : {1024u, 4096u, 16384u}) {
    std::string out;
    ASSERT_EQ(run({"estimate", "--preset", "regime2", "--n",
                   std::to_string(n), "--json"},
                  &out),
              0);
    nlohmann::json j = nlohmann::json::parse(out);
    double best = 1e18;
    for (const auto& row : j)
      if (row["applicable"].get<bool>() && !row["lower_bound"].get<bool>() &&
          !row["quantum"].get<bool>())
        best = std::min(best, row["log2_cost"].get<double>());
    double law = std::pow(double(n), 0.25) * std::pow(std::log2(double(n)), 0.75);
    EXPECT_GE(best / law, 0.5) << "n=" << n;
    EXPECT_LE(best / law, 2.0) << "n=" << n;
  }
}

TEST(CliSelftest, FastLevelPasses) {
  std::string out;
  EXPECT_EQ(run({"selftest", "--level", "fast"}, &out), 0);
  EXPECT_NE(out.find("ok - pke roundtrip, zero bit"), std::string::npos);
  EXPECT_EQ(out.find("FAIL"), std::string::npos);
}

TEST(CliParsing, HelpAndBadInvocationsUseTheContract) {
  EXPECT_EQ(run({"--help"}), 0);
  EXPECT_EQ(run({"frobnicate"}), 2);
  EXPECT_EQ(run({}), 2);
  EXPECT_EQ(run({"encrypt", "--pk", "x", "--bit", "2"}), 2);
  EXPECT_EQ(run({"keygen", "--seed", "xyz"}), 2);
}
