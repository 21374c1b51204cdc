#pragma once

// Hierarchical-matrix representation of A - lambda^2 M: dense near-field
// blocks, Taylor-factorized far-field blocks and 2x2 recursive blocks.

#include <array>
#include <iosfwd>
#include <memory>
#include <vector>

#include "fracfem/cluster.hpp"
#include "fracfem/kernel.hpp"

namespace fracfem {

struct HMatrixOptions {
  int rank = 10;           // Taylor terms per far-field block
  std::size_t n_min = 32;  // cluster leaf size
};

class HMatrix {
 public:
  BlockKind kind = BlockKind::Full;
  IndexRange rows;
  IndexRange cols;

  Matrix full;         // Full: rows.size() x cols.size()
  Matrix C, R;         // LowRank: block = scale * C * R^T
  double scale = 0.0;
  std::array<std::unique_ptr<HMatrix>, 4> child;  // Quad: 11, 12, 21, 22

  std::size_t num_rows() const { return rows.size(); }
  std::size_t num_cols() const { return cols.size(); }
  int rank() const { return static_cast<int>(C.cols()); }
  const HMatrix& block(int i) const { return *child[static_cast<std::size_t>(i)]; }

  /// Leaves (Full and LowRank) in depth-first order.
  std::vector<const HMatrix*> leaves() const;
};

/// Builds the partition from the cluster tree and fills every leaf. Leaf
/// assembly is OpenMP-parallel; the result does not depend on thread count.
/// Throws std::invalid_argument for rank < 2.
HMatrix assemble_hmatrix(const Mesh1D& mesh, const FracProblem& problem, const HMatrixOptions& opts = {});

/// y += a H x where x and y are indexed relative to H.cols.lo and H.rows.lo.
/// Recursive and single-threaded.
void hmatvec_add(const HMatrix& H, const double* x, double* y, double a = 1.0);

/// y = H x for a top-level H. Parallel over leaves with per-thread
/// accumulation.
Vector hmatvec(const HMatrix& H, const Vector& x);

/// y = H x by the plain recursion over the three block cases.
Vector hmatvec_reference(const HMatrix& H, const Vector& x);

std::size_t storage_scalars(const HMatrix& H);

/// Dense copy of H (local indexing).
Matrix densify(const HMatrix& H);

/// ||dense - H||_F, reconstructing one leaf at a time.
double frobenius_distance(const HMatrix& H, const Matrix& dense);

/// One CSV line per leaf: row_lo,row_hi,col_lo,col_hi,kind,rank,scalars
void write_block_stats(std::ostream& out, const HMatrix& H);

/// True when every diagonal block down the recursion is Full or Quad.
bool diagonal_blocks_dense(const HMatrix& H);

}  // namespace fracfem
