#pragma once

#include "f2mat.hpp"
#include "rng.hpp"

namespace mrk {

// Block partition of n x n matrices into a t x t grid of (n/t) x (n/t)
// blocks. t must divide n.
struct BlockIpContext {
  uint32_t n, t, b;

  BlockIpContext(uint32_t n_, uint32_t t_) : n(n_), t(t_), b(0) {
    if (n == 0 || t == 0 || n % t != 0)
      throw std::invalid_argument("BlockIpContext: t must divide n, both positive");
    b = n / t;
  }
};

inline BitMatrix block_of(const BlockIpContext& ctx, const BitMatrix& a,
                          uint32_t bi, uint32_t bj) {
  BitMatrix blk(ctx.b, ctx.b);
  for (uint32_t r = 0; r < ctx.b; r++)
    for (uint32_t c = 0; c < ctx.b; c++)
      blk.set(r, c, a.get(bi * ctx.b + r, bj * ctx.b + c));
  return blk;
}

inline void set_block(const BlockIpContext& ctx, BitMatrix& a, uint32_t bi,
                      uint32_t bj, const BitMatrix& blk) {
  for (uint32_t r = 0; r < ctx.b; r++)
    for (uint32_t c = 0; c < ctx.b; c++)
      a.set(bi * ctx.b + r, bj * ctx.b + c, blk.get(r, c));
}

// t x t block-wise inner product: entry (i, j) is the Frobenius inner product
// of the (i, j) blocks of A and B. Computed block-wise in O(n^2 / w) word
// ops, never through the n^2 x n^2 Kronecker form.
inline BitMatrix block_ip(const BlockIpContext& ctx, const BitMatrix& a,
                          const BitMatrix& b) {
  if (a.rows() != ctx.n || a.cols() != ctx.n || b.rows() != ctx.n || b.cols() != ctx.n)
    throw std::invalid_argument("block_ip: operands must be n x n");
  BitMatrix out(ctx.t, ctx.t);
  for (uint32_t bi = 0; bi < ctx.t; bi++) {
    for (uint32_t bj = 0; bj < ctx.t; bj++) {
      uint32_t pc = 0;
      for (uint32_t rr = 0; rr < ctx.b; rr++) {
        uint32_t row = bi * ctx.b + rr;
        for (uint32_t c = 0; c < ctx.b; c += 64) {
          uint32_t len = std::min<uint32_t>(64, ctx.b - c);
          uint64_t wa = a.window64(row, bj * ctx.b + c, len);
          uint64_t wb = b.window64(row, bj * ctx.b + c, len);
          pc += uint32_t(std::popcount(wa & wb));
        }
      }
      if (pc & 1) out.set(bi, bj, true);
    }
  }
  return out;
}

// Selector matrix P (t x n^2): row i is vec(E_ii kron I_b), so that
// <A, B>_t = P (A kron B) P^T. Test oracle; quadratic-size object.
inline BitMatrix selector_matrix(const BlockIpContext& ctx) {
  BitMatrix p(ctx.t, ctx.n * ctx.n);
  for (uint32_t i = 0; i < ctx.t; i++)
    for (uint32_t d = 0; d < ctx.b; d++) {
      uint32_t diag = i * ctx.b + d;
      p.set(i, diag * ctx.n + diag, true);
    }
  return p;
}

// Per-block kernel bases of the linear maps X |-> <vec(A_z^{ij}), vec(X)>.
// Block (i, j) of any matrix orthogonal to every A_z (block-wise) must lie in
// the kernel of the k x b^2 constraint matrix whose rows are vec(A_z^{ij}).
struct DualKernels {
  uint32_t n = 0, t = 0, b = 0;
  // basis[bi][bj]: canonical kernel basis, each vector of length b^2
  std::vector<std::vector<std::vector<BitVector>>> basis;
};

inline DualKernels dual_space_block_kernels(const BlockIpContext& ctx,
                                            const MatrixTuple& as) {
  if (!as.empty() && (as.rows() != ctx.n || as.cols() != ctx.n))
    throw std::invalid_argument("dual_space_block_kernels: tuple shape mismatch");
  DualKernels dk;
  dk.n = ctx.n;
  dk.t = ctx.t;
  dk.b = ctx.b;
  dk.basis.resize(ctx.t);
  for (uint32_t bi = 0; bi < ctx.t; bi++) {
    dk.basis[bi].resize(ctx.t);
    for (uint32_t bj = 0; bj < ctx.t; bj++) {
      BitMatrix constraints(uint32_t(as.size()), ctx.b * ctx.b);
      for (uint32_t z = 0; z < as.size(); z++)
        constraints.set_row(z, vec(block_of(ctx, as[z], bi, bj)));
      dk.basis[bi][bj] = kernel_basis(constraints);
    }
  }
  return dk;
}

// Uniform sample from the block-wise dual space: each block is an independent
// uniform combination of its kernel basis. With an empty constraint set every
// block kernel is the full space, so the sample is uniform over F2^{n x n}.
inline BitMatrix sample_dual(const DualKernels& dk, Rng& rng) {
  BlockIpContext ctx(dk.n, dk.t);
  BitMatrix h(dk.n, dk.n);
  for (uint32_t bi = 0; bi < dk.t; bi++)
    for (uint32_t bj = 0; bj < dk.t; bj++) {
      BitVector acc(dk.b * dk.b);
      for (const BitVector& v : dk.basis[bi][bj])
        if (rng.next_bit()) acc.xor_with(v);
      set_block(ctx, h, bi, bj, unvec(acc, dk.b, dk.b));
    }
  return h;
}

}  // namespace mrk
