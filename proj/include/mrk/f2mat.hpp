#pragma once

#include <algorithm>
#include <bit>
#include <cassert>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "rng.hpp"

namespace mrk {

using boost::multiprecision::cpp_int;

// Dimension guards. kron() additionally caps the total bit count of its
// result so a careless call can't allocate gigabytes.
inline constexpr uint32_t kMaxDim = 4096;
inline constexpr uint64_t kKronBitCap = uint64_t(1) << 24;

namespace detail {
inline uint32_t words_for(uint32_t bits) { return (bits + 63) / 64; }
inline uint64_t tail_mask(uint32_t bits) {
  uint32_t rem = bits % 64;
  return rem == 0 ? ~uint64_t(0) : (uint64_t(1) << rem) - 1;
}
}  // namespace detail

// Packed bit vector over F2. Little-endian within words, padding bits zero.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(uint32_t len) : len_(len), w_(detail::words_for(len), 0) {
    if (len > kMaxDim * kMaxDim) throw std::invalid_argument("BitVector too long");
  }

  uint32_t size() const { return len_; }

  bool get(uint32_t i) const {
    assert(i < len_);
    return (w_[i >> 6] >> (i & 63)) & 1;
  }

  void set(uint32_t i, bool v) {
    assert(i < len_);
    uint64_t m = uint64_t(1) << (i & 63);
    if (v) w_[i >> 6] |= m; else w_[i >> 6] &= ~m;
  }

  void flip(uint32_t i) {
    assert(i < len_);
    w_[i >> 6] ^= uint64_t(1) << (i & 63);
  }

  void xor_with(const BitVector& o) {
    if (o.len_ != len_) throw std::invalid_argument("BitVector xor: length mismatch");
    for (size_t i = 0; i < w_.size(); i++) w_[i] ^= o.w_[i];
  }

  bool is_zero() const {
    for (uint64_t w : w_) if (w) return false;
    return true;
  }

  uint32_t popcount() const {
    uint32_t c = 0;
    for (uint64_t w : w_) c += uint32_t(std::popcount(w));
    return c;
  }

  const std::vector<uint64_t>& words() const { return w_; }
  std::vector<uint64_t>& words() { return w_; }

  void mask_tail() {
    if (!w_.empty()) w_.back() &= detail::tail_mask(len_);
  }

  friend bool operator==(const BitVector&, const BitVector&) = default;
  friend auto operator<=>(const BitVector& a, const BitVector& b) {
    if (auto c = a.len_ <=> b.len_; c != 0) return c;
    return a.w_ <=> b.w_;
  }

 private:
  uint32_t len_ = 0;
  std::vector<uint64_t> w_;
};

inline bool dot(const BitVector& a, const BitVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  uint64_t acc = 0;
  for (size_t i = 0; i < a.words().size(); i++) acc ^= a.words()[i] & b.words()[i];
  return std::popcount(acc) & 1;
}

// Dense matrix over F2, row-major, rows packed into 64-bit words
// (little-endian bit order, padding bits kept zero so equality is a plain
// word compare).
class BitMatrix {
 public:
  BitMatrix() = default;

  BitMatrix(uint32_t rows, uint32_t cols)
      : rows_(rows), cols_(cols), wpr_(detail::words_for(cols)),
        w_(size_t(rows) * wpr_, 0) {
    if (rows > kMaxDim || cols > kMaxDim)
      throw std::invalid_argument("BitMatrix dimension exceeds kMaxDim");
  }

  static BitMatrix identity(uint32_t n) {
    BitMatrix m(n, n);
    for (uint32_t i = 0; i < n; i++) m.set(i, i, true);
    return m;
  }

  // Rows as "0101..." strings; test and doc convenience.
  static BitMatrix from_rows(std::initializer_list<std::string> rows) {
    uint32_t r = uint32_t(rows.size());
    uint32_t c = r ? uint32_t(rows.begin()->size()) : 0;
    BitMatrix m(r, c);
    uint32_t i = 0;
    for (const auto& s : rows) {
      if (s.size() != c) throw std::invalid_argument("from_rows: ragged rows");
      for (uint32_t j = 0; j < c; j++) {
        if (s[j] != '0' && s[j] != '1') throw std::invalid_argument("from_rows: not a bit");
        m.set(i, j, s[j] == '1');
      }
      i++;
    }
    return m;
  }

  uint32_t rows() const { return rows_; }
  uint32_t cols() const { return cols_; }
  uint32_t words_per_row() const { return wpr_; }

  bool get(uint32_t r, uint32_t c) const {
    assert(r < rows_ && c < cols_);
    return (w_[size_t(r) * wpr_ + (c >> 6)] >> (c & 63)) & 1;
  }

  void set(uint32_t r, uint32_t c, bool v) {
    assert(r < rows_ && c < cols_);
    uint64_t m = uint64_t(1) << (c & 63);
    size_t idx = size_t(r) * wpr_ + (c >> 6);
    if (v) w_[idx] |= m; else w_[idx] &= ~m;
  }

  void flip(uint32_t r, uint32_t c) {
    assert(r < rows_ && c < cols_);
    w_[size_t(r) * wpr_ + (c >> 6)] ^= uint64_t(1) << (c & 63);
  }

  uint64_t* row(uint32_t r) { return w_.data() + size_t(r) * wpr_; }
  const uint64_t* row(uint32_t r) const { return w_.data() + size_t(r) * wpr_; }

  void xor_row_into(uint32_t src, uint32_t dst) {
    uint64_t* d = row(dst);
    const uint64_t* s = row(src);
    for (uint32_t i = 0; i < wpr_; i++) d[i] ^= s[i];
  }

  void swap_rows(uint32_t a, uint32_t b) {
    if (a == b) return;
    uint64_t* pa = row(a);
    uint64_t* pb = row(b);
    for (uint32_t i = 0; i < wpr_; i++) std::swap(pa[i], pb[i]);
  }

  // Up to 64 bits of row r starting at column c0 (window may run past the
  // last column; the overhang reads as zero).
  uint64_t window64(uint32_t r, uint32_t c0, uint32_t len) const {
    assert(len >= 1 && len <= 64 && c0 < cols_);
    const uint64_t* p = row(r);
    uint32_t w = c0 >> 6, off = c0 & 63;
    uint64_t v = p[w] >> off;
    if (off != 0 && w + 1 < wpr_) v |= p[w + 1] << (64 - off);
    return len == 64 ? v : v & ((uint64_t(1) << len) - 1);
  }

  BitVector row_vector(uint32_t r) const {
    BitVector v(cols_);
    const uint64_t* p = row(r);
    for (uint32_t i = 0; i < wpr_; i++) v.words()[i] = p[i];
    return v;
  }

  void set_row(uint32_t r, const BitVector& v) {
    if (v.size() != cols_) throw std::invalid_argument("set_row: length mismatch");
    uint64_t* p = row(r);
    for (uint32_t i = 0; i < wpr_; i++) p[i] = v.words()[i];
  }

  bool is_zero() const {
    for (uint64_t w : w_) if (w) return false;
    return true;
  }

  uint32_t popcount() const {
    uint32_t c = 0;
    for (uint64_t w : w_) c += uint32_t(std::popcount(w));
    return c;
  }

  // Overwrite contents with zeros (keys/noise hygiene).
  void wipe() { std::fill(w_.begin(), w_.end(), 0); }

  std::string to_string() const {
    std::string s;
    for (uint32_t r = 0; r < rows_; r++) {
      for (uint32_t c = 0; c < cols_; c++) s += get(r, c) ? '1' : '0';
      s += '\n';
    }
    return s;
  }

  friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

 private:
  uint32_t rows_ = 0, cols_ = 0, wpr_ = 0;
  std::vector<uint64_t> w_;
};

inline BitMatrix add(const BitMatrix& a, const BitMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("add: dimension mismatch");
  BitMatrix c = a;
  for (uint32_t r = 0; r < a.rows(); r++) {
    uint64_t* cr = c.row(r);
    const uint64_t* br = b.row(r);
    for (uint32_t i = 0; i < a.words_per_row(); i++) cr[i] ^= br[i];
  }
  return c;
}

inline void add_in_place(BitMatrix& a, const BitMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("add_in_place: dimension mismatch");
  for (uint32_t r = 0; r < a.rows(); r++) {
    uint64_t* ar = a.row(r);
    const uint64_t* br = b.row(r);
    for (uint32_t i = 0; i < a.words_per_row(); i++) ar[i] ^= br[i];
  }
}

// acc += bit * a. The core loop of A(v) = sum v_i A_i.
inline void scale_accumulate(BitMatrix& acc, bool bit, const BitMatrix& a) {
  if (bit) add_in_place(acc, a);
}

// Word-parallel product: row i of C is the XOR of the B-rows selected by the
// set bits of row i of A. O(n*m/w) word ops per output row.
inline BitMatrix mul(const BitMatrix& a, const BitMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("mul: dimension mismatch");
  BitMatrix c(a.rows(), b.cols());
  for (uint32_t i = 0; i < a.rows(); i++) {
    uint64_t* ci = c.row(i);
    const uint64_t* ai = a.row(i);
    for (uint32_t w = 0; w < a.words_per_row(); w++) {
      uint64_t bits = ai[w];
      while (bits) {
        uint32_t j = uint32_t(w * 64 + std::countr_zero(bits));
        bits &= bits - 1;
        const uint64_t* bj = b.row(j);
        for (uint32_t t = 0; t < b.words_per_row(); t++) ci[t] ^= bj[t];
      }
    }
  }
  return c;
}

inline BitVector mul(const BitMatrix& a, const BitVector& x) {
  if (a.cols() != x.size()) throw std::invalid_argument("mul: dimension mismatch");
  BitVector y(a.rows());
  for (uint32_t i = 0; i < a.rows(); i++) {
    uint64_t acc = 0;
    const uint64_t* ai = a.row(i);
    for (uint32_t w = 0; w < a.words_per_row(); w++) acc ^= ai[w] & x.words()[w];
    if (std::popcount(acc) & 1) y.set(i, true);
  }
  return y;
}

inline BitMatrix transpose(const BitMatrix& a) {
  BitMatrix t(a.cols(), a.rows());
  for (uint32_t r = 0; r < a.rows(); r++) {
    const uint64_t* p = a.row(r);
    for (uint32_t w = 0; w < a.words_per_row(); w++) {
      uint64_t bits = p[w];
      while (bits) {
        uint32_t c = uint32_t(w * 64 + std::countr_zero(bits));
        bits &= bits - 1;
        t.set(c, r, true);
      }
    }
  }
  return t;
}

inline uint32_t rank(BitMatrix m) {
  uint32_t r = 0;
  for (uint32_t c = 0; c < m.cols() && r < m.rows(); c++) {
    uint32_t piv = r;
    while (piv < m.rows() && !m.get(piv, c)) piv++;
    if (piv == m.rows()) continue;
    m.swap_rows(piv, r);
    for (uint32_t i = r + 1; i < m.rows(); i++)
      if (m.get(i, c)) m.xor_row_into(r, i);
    r++;
  }
  return r;
}

struct RrefResult {
  BitMatrix mat;
  std::vector<uint32_t> pivots;  // pivot column of each leading row, ascending
};

inline RrefResult rref(BitMatrix m) {
  std::vector<uint32_t> pivots;
  uint32_t r = 0;
  for (uint32_t c = 0; c < m.cols() && r < m.rows(); c++) {
    uint32_t piv = r;
    while (piv < m.rows() && !m.get(piv, c)) piv++;
    if (piv == m.rows()) continue;
    m.swap_rows(piv, r);
    for (uint32_t i = 0; i < m.rows(); i++)
      if (i != r && m.get(i, c)) m.xor_row_into(r, i);
    pivots.push_back(c);
    r++;
  }
  return {std::move(m), std::move(pivots)};
}

// Canonical basis of the right kernel {v : M v = 0}, one vector per free
// column, ordered by free column index.
inline std::vector<BitVector> kernel_basis(const BitMatrix& m) {
  RrefResult rr = rref(m);
  std::vector<bool> is_pivot(m.cols(), false);
  for (uint32_t p : rr.pivots) is_pivot[p] = true;
  std::vector<BitVector> basis;
  for (uint32_t f = 0; f < m.cols(); f++) {
    if (is_pivot[f]) continue;
    BitVector v(m.cols());
    v.set(f, true);
    for (uint32_t i = 0; i < rr.pivots.size(); i++)
      if (rr.mat.get(i, f)) v.set(rr.pivots[i], true);
    basis.push_back(std::move(v));
  }
  return basis;
}

// One solution of M x = b (free variables zero), or nullopt if inconsistent.
inline std::optional<BitVector> solve(const BitMatrix& m, const BitVector& b) {
  if (b.size() != m.rows()) throw std::invalid_argument("solve: dimension mismatch");
  BitMatrix aug(m.rows(), m.cols() + 1);
  for (uint32_t r = 0; r < m.rows(); r++) {
    const uint64_t* src = m.row(r);
    uint64_t* dst = aug.row(r);
    for (uint32_t w = 0; w < m.words_per_row(); w++) dst[w] = src[w];
    if (b.get(r)) aug.set(r, m.cols(), true);
  }
  RrefResult rr = rref(std::move(aug));
  BitVector x(m.cols());
  for (uint32_t i = 0; i < rr.pivots.size(); i++) {
    if (rr.pivots[i] == m.cols()) return std::nullopt;  // 0 = 1 row
    if (rr.mat.get(i, m.cols())) x.set(rr.pivots[i], true);
  }
  return x;
}

// vec(A): columns stacked top to bottom, so entry (r, c) lands at c*rows + r.
inline BitVector vec(const BitMatrix& a) {
  BitVector v(a.rows() * a.cols());
  for (uint32_t c = 0; c < a.cols(); c++)
    for (uint32_t r = 0; r < a.rows(); r++)
      if (a.get(r, c)) v.set(c * a.rows() + r, true);
  return v;
}

inline BitMatrix unvec(const BitVector& v, uint32_t rows, uint32_t cols) {
  if (v.size() != rows * cols) throw std::invalid_argument("unvec: size mismatch");
  BitMatrix a(rows, cols);
  for (uint32_t c = 0; c < cols; c++)
    for (uint32_t r = 0; r < rows; r++)
      if (v.get(c * rows + r)) a.set(r, c, true);
  return a;
}

inline bool trace(const BitMatrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("trace: not square");
  bool t = false;
  for (uint32_t i = 0; i < a.rows(); i++) t ^= a.get(i, i);
  return t;
}

inline bool frobenius_ip(const BitMatrix& a, const BitMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("frobenius_ip: dimension mismatch");
  uint32_t pc = 0;
  for (uint32_t r = 0; r < a.rows(); r++) {
    const uint64_t* ar = a.row(r);
    const uint64_t* br = b.row(r);
    for (uint32_t w = 0; w < a.words_per_row(); w++)
      pc += uint32_t(std::popcount(ar[w] & br[w]));
  }
  return pc & 1;
}

namespace detail {
// dst ^= src << shift_bits, where src holds src_bits valid bits. Indices are
// bounded by dst_words; spill past the last valid word only ever carries
// zeros (src padding is zero) but must not be written out of range.
inline void xor_shifted(uint64_t* dst, uint32_t dst_words, const uint64_t* src,
                        uint32_t src_bits, uint32_t shift_bits) {
  uint32_t sw = shift_bits >> 6, sb = shift_bits & 63;
  uint32_t nsrc = words_for(src_bits);
  for (uint32_t i = 0; i < nsrc; i++) {
    if (src[i] == 0) continue;
    if (sw + i < dst_words) dst[sw + i] ^= src[i] << sb;
    if (sb != 0 && sw + i + 1 < dst_words) dst[sw + i + 1] ^= src[i] >> (64 - sb);
  }
}
}  // namespace detail

// Kronecker product; block (i, j) of the result is a_ij * B.
inline BitMatrix kron(const BitMatrix& a, const BitMatrix& b) {
  uint64_t rr = uint64_t(a.rows()) * b.rows();
  uint64_t cc = uint64_t(a.cols()) * b.cols();
  if (rr * cc > kKronBitCap) throw std::invalid_argument("kron: result exceeds bit cap");
  if (rr > kMaxDim || cc > kMaxDim) throw std::invalid_argument("kron: result exceeds kMaxDim");
  BitMatrix out{uint32_t(rr), uint32_t(cc)};
  for (uint32_t i1 = 0; i1 < a.rows(); i1++) {
    for (uint32_t j1 = 0; j1 < a.cols(); j1++) {
      if (!a.get(i1, j1)) continue;
      for (uint32_t i2 = 0; i2 < b.rows(); i2++) {
        detail::xor_shifted(out.row(i1 * b.rows() + i2), out.words_per_row(),
                            b.row(i2), b.cols(), j1 * b.cols());
      }
    }
  }
  return out;
}

inline BitMatrix sample_uniform(uint32_t rows, uint32_t cols, Rng& rng) {
  BitMatrix m(rows, cols);
  uint64_t mask = detail::tail_mask(cols);
  for (uint32_t r = 0; r < rows; r++) {
    uint64_t* p = m.row(r);
    for (uint32_t w = 0; w < m.words_per_row(); w++) p[w] = rng.next_u64();
    if (m.words_per_row()) p[m.words_per_row() - 1] &= mask;
  }
  return m;
}

inline BitVector sample_uniform_vector(uint32_t len, Rng& rng) {
  BitVector v(len);
  for (auto& w : v.words()) w = rng.next_u64();
  v.mask_tail();
  return v;
}

// Number of n x n matrices over F2 of rank exactly rho:
//   N_rho = [prod_{i<rho} (2^n - 2^i)]^2 / prod_{i<rho} (2^rho - 2^i).
inline cpp_int count_rank_exact(uint32_t n, uint32_t rho) {
  if (rho > n) return 0;
  cpp_int num = 1, den = 1;
  for (uint32_t i = 0; i < rho; i++) {
    num *= (cpp_int(1) << n) - (cpp_int(1) << i);
    den *= (cpp_int(1) << rho) - (cpp_int(1) << i);
  }
  return num * num / den;
}

namespace detail {
inline cpp_int uniform_below(const cpp_int& bound, Rng& rng) {
  // Rejection sampling over msb(bound) bits.
  size_t bits = msb(bound) + 1;
  for (;;) {
    cpp_int v = 0;
    for (size_t i = 0; i < bits; i += 64) {
      v <<= 64;
      v |= rng.next_u64();
    }
    v >>= (64 - bits % 64) % 64;
    if (v < bound) return v;
  }
}

inline BitMatrix sample_full_rank(uint32_t rows, uint32_t cols, Rng& rng) {
  // Uniform over full-rank rows x cols matrices by rejection; the full-rank
  // fraction is bounded below by ~0.288, so a handful of tries suffice.
  uint32_t target = std::min(rows, cols);
  for (;;) {
    BitMatrix m = sample_uniform(rows, cols, rng);
    if (rank(m) == target) return m;
  }
}
}  // namespace detail

// Ordered list of matrices sharing one shape. Dims are explicit so the empty
// tuple is well-formed (block kernels of an empty constraint set, etc.).
class MatrixTuple {
 public:
  MatrixTuple() = default;
  MatrixTuple(uint32_t rows, uint32_t cols) : rows_(rows), cols_(cols) {}

  explicit MatrixTuple(std::vector<BitMatrix> items) {
    if (items.empty())
      throw std::invalid_argument("MatrixTuple: dims required for empty tuple");
    rows_ = items[0].rows();
    cols_ = items[0].cols();
    for (auto& m : items) check_dims(m);
    items_ = std::move(items);
  }

  uint32_t rows() const { return rows_; }
  uint32_t cols() const { return cols_; }
  size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

  void push_back(BitMatrix m) {
    check_dims(m);
    items_.push_back(std::move(m));
  }

  const BitMatrix& operator[](size_t i) const { return items_[i]; }
  BitMatrix& operator[](size_t i) { return items_[i]; }

  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }
  const std::vector<BitMatrix>& items() const { return items_; }

  friend bool operator==(const MatrixTuple&, const MatrixTuple&) = default;

 private:
  void check_dims(const BitMatrix& m) const {
    if (m.rows() != rows_ || m.cols() != cols_)
      throw std::invalid_argument("MatrixTuple: shape mismatch");
  }

  uint32_t rows_ = 0, cols_ = 0;
  std::vector<BitMatrix> items_;
};

// A(v) = sum_i v_i A_i.
inline BitMatrix tuple_combination(const MatrixTuple& as, const BitVector& v) {
  if (v.size() != as.size()) throw std::invalid_argument("tuple_combination: size mismatch");
  BitMatrix acc(as.rows(), as.cols());
  for (uint32_t i = 0; i < as.size(); i++) scale_accumulate(acc, v.get(i), as[i]);
  return acc;
}

// Uniform sample from { M in F2^{n x n} : rank(M) <= r }. Rank class rho is
// drawn with exact weight N_rho, then M = X * Y with X uniform full column
// rank n x rho and Y uniform full row rank rho x n; every rank-rho matrix has
// exactly |GL_rho| such factorizations, so M is uniform in its class.
inline BitMatrix sample_rank_at_most(uint32_t n, uint32_t r, Rng& rng) {
  if (r > n) throw std::invalid_argument("sample_rank_at_most: r > n");
  static std::map<std::pair<uint32_t, uint32_t>, std::vector<cpp_int>> cache;
  static std::mutex cache_mu;
  std::vector<cpp_int> cum;
  {
    std::lock_guard<std::mutex> lock(cache_mu);
    auto& entry = cache[{n, r}];
    if (entry.empty()) {
      cpp_int acc = 0;
      for (uint32_t rho = 0; rho <= r; rho++) {
        acc += count_rank_exact(n, rho);
        entry.push_back(acc);
      }
    }
    cum = entry;
  }
  cpp_int u = detail::uniform_below(cum.back(), rng);
  uint32_t rho = 0;
  while (u >= cum[rho]) rho++;
  if (rho == 0) return BitMatrix(n, n);
  BitMatrix x = detail::sample_full_rank(n, rho, rng);
  BitMatrix y = detail::sample_full_rank(rho, n, rng);
  return mul(x, y);
}

}  // namespace mrk
