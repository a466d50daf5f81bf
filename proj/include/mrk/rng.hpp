#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>

namespace mrk {

// Deterministic random stream: ChaCha20 block function keyed by a 32-byte
// seed, 64-bit block counter. Distinct seeds give independent streams.
// Single-owner: not safe for concurrent use; fork() derives an independent
// child stream for worker threads.
class Rng {
 public:
  using Seed = std::array<uint8_t, 32>;

  explicit Rng(const Seed& seed) : seed_(seed) { refill(); }

  // Convenience: expand a small integer into a seed (little-endian, zero pad).
  explicit Rng(uint64_t n) {
    seed_.fill(0);
    for (int i = 0; i < 8; i++) seed_[i] = uint8_t(n >> (8 * i));
    refill();
  }

  // 64 hex chars -> 32-byte seed.
  static Rng from_hex(const std::string& hex) {
    if (hex.size() != 64) throw std::invalid_argument("seed must be 64 hex chars");
    Seed s{};
    for (size_t i = 0; i < 32; i++) {
      int hi = hex_val(hex[2 * i]), lo = hex_val(hex[2 * i + 1]);
      if (hi < 0 || lo < 0) throw std::invalid_argument("seed must be hex");
      s[i] = uint8_t(hi << 4 | lo);
    }
    return Rng(s);
  }

  const Seed& seed() const { return seed_; }

  uint64_t next_u64() {
    if (pos_ == 8) refill();
    return buf_[pos_++];
  }

  uint32_t next_u32() { return uint32_t(next_u64()); }

  bool next_bit() {
    if (bit_cnt_ == 0) {
      bit_buf_ = next_u64();
      bit_cnt_ = 64;
    }
    bool b = bit_buf_ & 1;
    bit_buf_ >>= 1;
    bit_cnt_--;
    return b;
  }

  // Uniform in [0, bound), bound >= 1. Rejection sampling on a masked draw.
  uint64_t below(uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("below(0)");
    if (bound == 1) return 0;
    uint64_t mask = ~uint64_t(0) >> std::countl_zero(bound - 1);
    for (;;) {
      uint64_t v = next_u64() & mask;
      if (v < bound) return v;
    }
  }

  // Child stream keyed by the next 32 bytes of this stream.
  Rng fork() {
    Seed s;
    for (int i = 0; i < 4; i++) {
      uint64_t w = next_u64();
      std::memcpy(s.data() + 8 * i, &w, 8);
    }
    return Rng(s);
  }

 private:
  static int hex_val(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  }

  static uint32_t rotl(uint32_t x, int n) { return (x << n) | (x >> (32 - n)); }

  static void quarter(uint32_t& a, uint32_t& b, uint32_t& c, uint32_t& d) {
    a += b; d ^= a; d = rotl(d, 16);
    c += d; b ^= c; b = rotl(b, 12);
    a += b; d ^= a; d = rotl(d, 8);
    c += d; b ^= c; b = rotl(b, 7);
  }

  void refill() {
    uint32_t st[16];
    st[0] = 0x61707865; st[1] = 0x3320646e; st[2] = 0x79622d32; st[3] = 0x6b206574;
    for (int i = 0; i < 8; i++) {
      uint32_t w;
      std::memcpy(&w, seed_.data() + 4 * i, 4);
      st[4 + i] = w;
    }
    st[12] = uint32_t(counter_);
    st[13] = uint32_t(counter_ >> 32);
    st[14] = 0;
    st[15] = 0;
    uint32_t x[16];
    std::memcpy(x, st, sizeof x);
    for (int round = 0; round < 10; round++) {
      quarter(x[0], x[4], x[8], x[12]);
      quarter(x[1], x[5], x[9], x[13]);
      quarter(x[2], x[6], x[10], x[14]);
      quarter(x[3], x[7], x[11], x[15]);
      quarter(x[0], x[5], x[10], x[15]);
      quarter(x[1], x[6], x[11], x[12]);
      quarter(x[2], x[7], x[8], x[13]);
      quarter(x[3], x[4], x[9], x[14]);
    }
    for (int i = 0; i < 16; i++) x[i] += st[i];
    std::memcpy(buf_.data(), x, 64);
    counter_++;
    pos_ = 0;
  }

  Seed seed_{};
  uint64_t counter_ = 0;
  std::array<uint64_t, 8> buf_{};
  int pos_ = 8;
  uint64_t bit_buf_ = 0;
  int bit_cnt_ = 0;
};

}  // namespace mrk
