#pragma once

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "f2mat.hpp"
#include "minrank.hpp"
#include "pke.hpp"

namespace mrk {

// Thrown on malformed input: bad magic, unsupported version, truncation,
// inconsistent dimensions.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a file cannot be opened or written.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace serial_detail {

inline void put_u16(std::ostream& os, uint16_t v) {
  uint8_t b[2] = {uint8_t(v), uint8_t(v >> 8)};
  os.write(reinterpret_cast<const char*>(b), 2);
}

inline void put_u32(std::ostream& os, uint32_t v) {
  uint8_t b[4] = {uint8_t(v), uint8_t(v >> 8), uint8_t(v >> 16), uint8_t(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline void read_exact(std::istream& is, uint8_t* dst, size_t len) {
  is.read(reinterpret_cast<char*>(dst), std::streamsize(len));
  if (size_t(is.gcount()) != len) throw FormatError("truncated input");
}

inline uint16_t get_u16(std::istream& is) {
  uint8_t b[2];
  read_exact(is, b, 2);
  return uint16_t(b[0]) | uint16_t(b[1]) << 8;
}

inline uint32_t get_u32(std::istream& is) {
  uint8_t b[4];
  read_exact(is, b, 4);
  return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 |
         uint32_t(b[3]) << 24;
}

inline uint8_t get_u8(std::istream& is) {
  uint8_t b;
  read_exact(is, &b, 1);
  return b;
}

inline void put_magic(std::ostream& os, const char* magic) {
  os.write(magic, 4);
}

inline void expect_magic(std::istream& is, const char* magic) {
  uint8_t b[4];
  read_exact(is, b, 4);
  if (std::memcmp(b, magic, 4) != 0)
    throw FormatError(std::string("bad magic, expected ") + magic);
}

inline void expect_version(std::istream& is) {
  uint16_t v = get_u16(is);
  if (v != 1) throw FormatError("unsupported format version " + std::to_string(v));
}

}  // namespace serial_detail

// Matrix encoding: u32 rows, u32 cols (little endian), then each row as
// ceil(cols/8) bytes with bit c stored at byte c/8, position c%8.
inline void write_matrix(std::ostream& os, const BitMatrix& m) {
  using namespace serial_detail;
  put_u32(os, m.rows());
  put_u32(os, m.cols());
  size_t bpr = (m.cols() + 7) / 8;
  std::vector<uint8_t> row(bpr);
  for (uint32_t r = 0; r < m.rows(); r++) {
    std::fill(row.begin(), row.end(), 0);
    for (uint32_t c = 0; c < m.cols(); c++)
      if (m.get(r, c)) row[c / 8] |= uint8_t(1u << (c % 8));
    os.write(reinterpret_cast<const char*>(row.data()), std::streamsize(bpr));
  }
}

inline BitMatrix read_matrix(std::istream& is) {
  using namespace serial_detail;
  uint32_t rows = get_u32(is);
  uint32_t cols = get_u32(is);
  if (rows > kMaxDim || cols > kMaxDim)
    throw FormatError("matrix dimensions out of range");
  BitMatrix m(rows, cols);
  size_t bpr = (cols + 7) / 8;
  std::vector<uint8_t> row(bpr);
  for (uint32_t r = 0; r < rows; r++) {
    read_exact(is, row.data(), bpr);
    for (uint32_t c = 0; c < cols; c++)
      if (row[c / 8] >> (c % 8) & 1) m.set(r, c, true);
  }
  return m;
}

// Bit vector encoding: u32 length, then packed bytes as above.
inline void write_bitvec(std::ostream& os, const BitVector& v) {
  using namespace serial_detail;
  put_u32(os, v.size());
  size_t nb = (v.size() + 7) / 8;
  std::vector<uint8_t> bytes(nb, 0);
  for (uint32_t i = 0; i < v.size(); i++)
    if (v.get(i)) bytes[i / 8] |= uint8_t(1u << (i % 8));
  os.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(nb));
}

inline BitVector read_bitvec(std::istream& is) {
  using namespace serial_detail;
  uint32_t len = get_u32(is);
  if (len > kMaxDim * kMaxDim) throw FormatError("bit vector length out of range");
  BitVector v(len);
  size_t nb = (len + 7) / 8;
  std::vector<uint8_t> bytes(nb);
  read_exact(is, bytes.data(), nb);
  for (uint32_t i = 0; i < len; i++)
    if (bytes[i / 8] >> (i % 8) & 1) v.set(i, true);
  return v;
}

namespace serial_detail {

inline BitMatrix read_matrix_checked(std::istream& is, uint32_t rows,
                                     uint32_t cols) {
  BitMatrix m = read_matrix(is);
  if (m.rows() != rows || m.cols() != cols)
    throw FormatError("matrix dimensions do not match header");
  return m;
}

}  // namespace serial_detail

// Instance file (MRNK v1): magic, u16 version, u32 n,k,r,t, u8 has_witness,
// A_1..A_k, Y, then optionally s and E.
inline void write_instance(std::ostream& os, const PlantedInstance& inst) {
  using namespace serial_detail;
  put_magic(os, "MRNK");
  put_u16(os, 1);
  put_u32(os, inst.params.n);
  put_u32(os, inst.params.k);
  put_u32(os, inst.params.r);
  put_u32(os, inst.params.t);
  uint8_t hw = inst.witness.has_value() ? 1 : 0;
  os.write(reinterpret_cast<const char*>(&hw), 1);
  for (size_t i = 0; i < inst.as.size(); i++) write_matrix(os, inst.as[i]);
  write_matrix(os, inst.y);
  if (inst.witness) {
    write_bitvec(os, inst.witness->s);
    write_matrix(os, inst.witness->e);
  }
}

inline PlantedInstance read_instance(std::istream& is) {
  using namespace serial_detail;
  expect_magic(is, "MRNK");
  expect_version(is);
  uint32_t n = get_u32(is);
  uint32_t k = get_u32(is);
  uint32_t r = get_u32(is);
  uint32_t t = get_u32(is);
  uint8_t hw = get_u8(is);
  if (hw > 1) throw FormatError("invalid witness flag");
  PlantedInstance inst;
  inst.params = Params::make(n, k, r, t, /*strict=*/false);
  ParamReport rep = validate(inst.params);
  if (!rep.ok) throw FormatError("invalid parameters in instance header");
  inst.as = MatrixTuple(n, n);
  for (uint32_t i = 0; i < k; i++)
    inst.as.push_back(read_matrix_checked(is, n, n));
  inst.y = read_matrix_checked(is, n, n);
  if (hw) {
    Witness w;
    w.s = read_bitvec(is);
    if (w.s.size() != k) throw FormatError("witness length does not match k");
    w.e = read_matrix_checked(is, n, n);
    inst.witness = std::move(w);
  }
  return inst;
}

namespace serial_detail {

inline void put_params(std::ostream& os, const Params& p) {
  put_u32(os, p.n);
  put_u32(os, p.k);
  put_u32(os, p.r);
  put_u32(os, p.t);
  put_u32(os, p.tau);
  uint8_t st = p.strict ? 1 : 0;
  os.write(reinterpret_cast<const char*>(&st), 1);
}

inline Params get_params(std::istream& is) {
  Params p;
  p.n = get_u32(is);
  p.k = get_u32(is);
  p.r = get_u32(is);
  p.t = get_u32(is);
  p.tau = get_u32(is);
  uint8_t st = get_u8(is);
  if (st > 1) throw FormatError("invalid strict flag");
  p.strict = st == 1;
  ParamReport rep = validate(Params::make(p.n, p.k, p.r, p.t, /*strict=*/false));
  if (!rep.ok) throw FormatError("invalid parameters in key header");
  return p;
}

}  // namespace serial_detail

// Public key (MRPK v1): magic, version, params, A_1..A_k, Y.
inline void write_public_key(std::ostream& os, const PublicKey& pk) {
  using namespace serial_detail;
  put_magic(os, "MRPK");
  put_u16(os, 1);
  put_params(os, pk.params);
  for (size_t i = 0; i < pk.as.size(); i++) write_matrix(os, pk.as[i]);
  write_matrix(os, pk.y);
}

inline PublicKey read_public_key(std::istream& is) {
  using namespace serial_detail;
  expect_magic(is, "MRPK");
  expect_version(is);
  PublicKey pk;
  pk.params = get_params(is);
  pk.as = MatrixTuple(pk.params.n, pk.params.n);
  for (uint32_t i = 0; i < pk.params.k; i++)
    pk.as.push_back(read_matrix_checked(is, pk.params.n, pk.params.n));
  pk.y = read_matrix_checked(is, pk.params.n, pk.params.n);
  return pk;
}

// Secret key (MRSK v1): magic, version, params, s.
inline void write_secret_key(std::ostream& os, const SecretKey& sk) {
  using namespace serial_detail;
  put_magic(os, "MRSK");
  put_u16(os, 1);
  put_params(os, sk.params);
  write_bitvec(os, sk.s);
}

inline SecretKey read_secret_key(std::istream& is) {
  using namespace serial_detail;
  expect_magic(is, "MRSK");
  expect_version(is);
  SecretKey sk;
  sk.params = get_params(is);
  sk.s = read_bitvec(is);
  if (sk.s.size() != sk.params.k)
    throw FormatError("secret key length does not match k");
  return sk;
}

// Ciphertext (MRCT v1): magic, version, u32 k, u32 t, C_1..C_{k+1}.
inline void write_ciphertext(std::ostream& os, const Ciphertext& ct) {
  using namespace serial_detail;
  put_magic(os, "MRCT");
  put_u16(os, 1);
  put_u32(os, ct.k);
  put_u32(os, ct.t);
  for (const auto& c : ct.cs) write_matrix(os, c);
}

inline Ciphertext read_ciphertext(std::istream& is) {
  using namespace serial_detail;
  expect_magic(is, "MRCT");
  expect_version(is);
  Ciphertext ct;
  ct.k = get_u32(is);
  ct.t = get_u32(is);
  if (ct.t == 0 || ct.t > kMaxDim || ct.k > kMaxDim * kMaxDim)
    throw FormatError("ciphertext dimensions out of range");
  for (uint32_t i = 0; i <= ct.k; i++)
    ct.cs.push_back(serial_detail::read_matrix_checked(is, ct.t, ct.t));
  return ct;
}

// File helpers. Opening failures raise IoError; parse failures FormatError.
namespace serial_detail {

template <class T, class Reader>
T load_with(const std::string& path, Reader reader) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  T out = reader(f);
  // reject trailing garbage
  f.peek();
  if (!f.eof()) throw FormatError("trailing bytes in " + path);
  return out;
}

template <class T, class Writer>
void save_with(const std::string& path, const T& value, Writer writer) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path + " for writing");
  writer(f, value);
  f.flush();
  if (!f) throw IoError("write failed for " + path);
}

}  // namespace serial_detail

inline PlantedInstance load_instance(const std::string& path) {
  return serial_detail::load_with<PlantedInstance>(
      path, [](std::istream& is) { return read_instance(is); });
}
inline void save_instance(const std::string& path, const PlantedInstance& v) {
  serial_detail::save_with(path, v,
                           [](std::ostream& os, const PlantedInstance& x) { write_instance(os, x); });
}

inline PublicKey load_public_key(const std::string& path) {
  return serial_detail::load_with<PublicKey>(
      path, [](std::istream& is) { return read_public_key(is); });
}
inline void save_public_key(const std::string& path, const PublicKey& v) {
  serial_detail::save_with(path, v,
                           [](std::ostream& os, const PublicKey& x) { write_public_key(os, x); });
}

inline SecretKey load_secret_key(const std::string& path) {
  return serial_detail::load_with<SecretKey>(
      path, [](std::istream& is) { return read_secret_key(is); });
}
inline void save_secret_key(const std::string& path, const SecretKey& v) {
  serial_detail::save_with(path, v,
                           [](std::ostream& os, const SecretKey& x) { write_secret_key(os, x); });
}

inline Ciphertext load_ciphertext(const std::string& path) {
  return serial_detail::load_with<Ciphertext>(
      path, [](std::istream& is) { return read_ciphertext(is); });
}
inline void save_ciphertext(const std::string& path, const Ciphertext& v) {
  serial_detail::save_with(path, v,
                           [](std::ostream& os, const Ciphertext& x) { write_ciphertext(os, x); });
}

}  // namespace mrk
