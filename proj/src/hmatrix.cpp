#include "fracfem/hmatrix.hpp"

#include <omp.h>

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace fracfem {

std::vector<const HMatrix*> HMatrix::leaves() const {
  std::vector<const HMatrix*> out;
  std::vector<const HMatrix*> stack{this};
  while (!stack.empty()) {
    const HMatrix* h = stack.back();
    stack.pop_back();
    if (h->kind == BlockKind::Quad) {
      for (int c = 3; c >= 0; --c) stack.push_back(h->child[static_cast<std::size_t>(c)].get());
    } else {
      out.push_back(h);
    }
  }
  return out;
}

namespace {

std::unique_ptr<HMatrix> build_structure(const BlockTree& blocks, int id, std::vector<HMatrix*>& leaves) {
  const auto& b = blocks.node(id);
  auto h = std::make_unique<HMatrix>();
  h->kind = b.kind;
  h->rows = blocks.clusters().node(b.row).range;
  h->cols = blocks.clusters().node(b.col).range;
  if (b.kind == BlockKind::Quad) {
    for (int c = 0; c < 4; ++c) h->child[static_cast<std::size_t>(c)] = build_structure(blocks, b.child[c], leaves);
  } else {
    leaves.push_back(h.get());
  }
  return h;
}

void fill_full(HMatrix& h, const Mesh1D& mesh, const EntryEvaluator& eval, double lambda) {
  const auto m = static_cast<Eigen::Index>(h.rows.size());
  const auto n = static_cast<Eigen::Index>(h.cols.size());
  h.full.resize(m, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) {
      h.full(i, j) = eval(h.rows.lo + static_cast<std::size_t>(i), h.cols.lo + static_cast<std::size_t>(j));
    }
  }
  if (lambda == 0.0) return;
  const double l2 = lambda * lambda;
  for (Eigen::Index i = 0; i < m; ++i) {
    const std::size_t gi = h.rows.lo + static_cast<std::size_t>(i);
    const std::size_t I = gi + 1;
    for (std::size_t gj = (gi == 0 ? 0 : gi - 1); gj <= gi + 1; ++gj) {
      if (gj < h.cols.lo || gj >= h.cols.hi) continue;
      double mass;
      if (gj == gi) {
        mass = (mesh.h(I) + mesh.h(I + 1)) / 3.0;
      } else if (gj == gi + 1) {
        mass = mesh.h(I + 1) / 6.0;
      } else {
        mass = mesh.h(I) / 6.0;
      }
      h.full(i, static_cast<Eigen::Index>(gj - h.cols.lo)) -= l2 * mass;
    }
  }
}

void fill_low_rank(HMatrix& h, const Mesh1D& mesh, const FracProblem& p, int rank, double inv_gamma) {
  const double x_lo = mesh.node(h.rows.lo), x_hi = mesh.node(h.rows.hi + 1);
  const double y_lo = mesh.node(h.cols.lo), y_hi = mesh.node(h.cols.hi + 1);
  double weight;
  if (x_hi < y_lo) {
    weight = p.kappa2;  // rows left of columns: only the right-sided kernel is active
  } else if (y_hi < x_lo) {
    weight = p.kappa1;
  } else {
    throw std::logic_error("assemble_hmatrix: low-rank block on overlapping clusters");
  }
  // Mass-matrix couplings are never in a low-rank block: they need adjacent unknowns.
  if (h.rows.hi == h.cols.lo || h.cols.hi == h.rows.lo) {
    throw std::logic_error("assemble_hmatrix: low-rank block touches the tridiagonal band");
  }
  h.scale = weight * inv_gamma;
  if (weight == 0.0) {
    h.C.resize(static_cast<Eigen::Index>(h.rows.size()), 0);
    h.R.resize(static_cast<Eigen::Index>(h.cols.size()), 0);
    return;
  }
  const TaylorFactorization fac{rank, 0.5 * (x_lo + x_hi)};
  const double rho = 0.5 * (x_hi - x_lo);
  h.C = far_field_factor_C(mesh, h.rows, fac, rho);
  h.R = far_field_factor_R(mesh, h.cols, fac, p.alpha, rho);
}

}  // namespace

HMatrix assemble_hmatrix(const Mesh1D& mesh, const FracProblem& problem, const HMatrixOptions& opts) {
  problem.validate();
  if (opts.rank < 2) throw std::invalid_argument("assemble_hmatrix: rank must be >= 2");
  const ClusterTree tree(mesh, opts.n_min);
  const BlockTree blocks(tree);
  std::vector<HMatrix*> leaves;
  auto root = build_structure(blocks, 0, leaves);

  const EntryEvaluator eval(mesh, problem.alpha, problem.kappa1, problem.kappa2);
  const double inv_gamma = 1.0 / std::tgamma(2.0 - problem.alpha);
  const auto n_leaves = static_cast<std::ptrdiff_t>(leaves.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t l = 0; l < n_leaves; ++l) {
    HMatrix& h = *leaves[static_cast<std::size_t>(l)];
    if (h.kind == BlockKind::Full) {
      fill_full(h, mesh, eval, problem.lambda);
    } else {
      fill_low_rank(h, mesh, problem, opts.rank, inv_gamma);
    }
  }
  return std::move(*root);
}

namespace {

void leaf_apply(const HMatrix& h, const double* x, double* y, double a = 1.0) {
  const auto m = static_cast<Eigen::Index>(h.rows.size());
  const auto n = static_cast<Eigen::Index>(h.cols.size());
  Eigen::Map<const Vector> xv(x, n);
  Eigen::Map<Vector> yv(y, m);
  if (h.kind == BlockKind::Full) {
    yv.noalias() += a * (h.full * xv);
  } else if (h.C.cols() > 0) {
    const Vector t = h.R.transpose() * xv;
    yv.noalias() += (a * h.scale) * (h.C * t);
  }
}

}  // namespace

void hmatvec_add(const HMatrix& H, const double* x, double* y, double a) {
  if (H.kind != BlockKind::Quad) {
    leaf_apply(H, x, y, a);
    return;
  }
  for (int c = 0; c < 4; ++c) {
    const HMatrix& b = H.block(c);
    hmatvec_add(b, x + (b.cols.lo - H.cols.lo), y + (b.rows.lo - H.rows.lo), a);
  }
}

Vector hmatvec(const HMatrix& H, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != H.num_cols()) throw std::invalid_argument("hmatvec: dimension mismatch");
  const auto leaves = H.leaves();
  const auto m = static_cast<Eigen::Index>(H.num_rows());
  Vector y = Vector::Zero(m);
  const auto n_leaves = static_cast<std::ptrdiff_t>(leaves.size());
#pragma omp parallel
  {
    Vector local = Vector::Zero(m);
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t l = 0; l < n_leaves; ++l) {
      const HMatrix& b = *leaves[static_cast<std::size_t>(l)];
      leaf_apply(b, x.data() + (b.cols.lo - H.cols.lo), local.data() + (b.rows.lo - H.rows.lo));
    }
#pragma omp critical
    y += local;
  }
  return y;
}

namespace {

// Block-by-block recursion: Full -> dense product, LowRank -> C (R^T x),
// Quad -> the four sub-products added into the two halves of y.
Vector reference_apply(const HMatrix& H, const Eigen::Ref<const Vector>& x) {
  switch (H.kind) {
    case BlockKind::Full:
      return H.full * x;
    case BlockKind::LowRank:
      if (H.C.cols() == 0) return Vector::Zero(static_cast<Eigen::Index>(H.num_rows()));
      return H.scale * (H.C * (H.R.transpose() * x));
    case BlockKind::Quad: {
      const auto n1 = static_cast<Eigen::Index>(H.block(0).num_cols());
      const auto n2 = static_cast<Eigen::Index>(H.block(1).num_cols());
      const auto m1 = static_cast<Eigen::Index>(H.block(0).num_rows());
      const auto m2 = static_cast<Eigen::Index>(H.block(2).num_rows());
      Vector y(m1 + m2);
      y.head(m1) = reference_apply(H.block(0), x.head(n1)) + reference_apply(H.block(1), x.tail(n2));
      y.tail(m2) = reference_apply(H.block(2), x.head(n1)) + reference_apply(H.block(3), x.tail(n2));
      return y;
    }
  }
  return {};
}

}  // namespace

Vector hmatvec_reference(const HMatrix& H, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != H.num_cols()) {
    throw std::invalid_argument("hmatvec_reference: dimension mismatch");
  }
  return reference_apply(H, x);
}

std::size_t storage_scalars(const HMatrix& H) {
  std::size_t s = 0;
  for (const HMatrix* b : H.leaves()) {
    if (b->kind == BlockKind::Full) {
      s += b->num_rows() * b->num_cols();
    } else {
      s += static_cast<std::size_t>(b->rank()) * (b->num_rows() + b->num_cols());
    }
  }
  return s;
}

namespace {

Matrix leaf_dense(const HMatrix& b) {
  if (b.kind == BlockKind::Full) return b.full;
  if (b.C.cols() == 0) return Matrix::Zero(static_cast<Eigen::Index>(b.num_rows()), static_cast<Eigen::Index>(b.num_cols()));
  return b.scale * (b.C * b.R.transpose());
}

}  // namespace

Matrix densify(const HMatrix& H) {
  Matrix D(static_cast<Eigen::Index>(H.num_rows()), static_cast<Eigen::Index>(H.num_cols()));
  for (const HMatrix* b : H.leaves()) {
    D.block(static_cast<Eigen::Index>(b->rows.lo - H.rows.lo), static_cast<Eigen::Index>(b->cols.lo - H.cols.lo),
            static_cast<Eigen::Index>(b->num_rows()), static_cast<Eigen::Index>(b->num_cols())) = leaf_dense(*b);
  }
  return D;
}

double frobenius_distance(const HMatrix& H, const Matrix& dense) {
  if (static_cast<std::size_t>(dense.rows()) != H.num_rows() || static_cast<std::size_t>(dense.cols()) != H.num_cols()) {
    throw std::invalid_argument("frobenius_distance: dimension mismatch");
  }
  double sum = 0.0;
  for (const HMatrix* b : H.leaves()) {
    const auto blk = dense.block(static_cast<Eigen::Index>(b->rows.lo - H.rows.lo),
                                 static_cast<Eigen::Index>(b->cols.lo - H.cols.lo),
                                 static_cast<Eigen::Index>(b->num_rows()), static_cast<Eigen::Index>(b->num_cols()));
    sum += (blk - leaf_dense(*b)).squaredNorm();
  }
  return std::sqrt(sum);
}

void write_block_stats(std::ostream& out, const HMatrix& H) {
  out << "row_lo,row_hi,col_lo,col_hi,kind,rank,scalars\n";
  for (const HMatrix* b : H.leaves()) {
    const bool full = b->kind == BlockKind::Full;
    const std::size_t scalars = full ? b->num_rows() * b->num_cols()
                                     : static_cast<std::size_t>(b->rank()) * (b->num_rows() + b->num_cols());
    out << b->rows.lo << ',' << b->rows.hi << ',' << b->cols.lo << ',' << b->cols.hi << ','
        << (full ? "full" : "lowrank") << ',' << (full ? 0 : b->rank()) << ',' << scalars << '\n';
  }
}

bool diagonal_blocks_dense(const HMatrix& H) {
  switch (H.kind) {
    case BlockKind::Full:
      return true;
    case BlockKind::LowRank:
      return false;
    case BlockKind::Quad:
      return diagonal_blocks_dense(H.block(0)) && diagonal_blocks_dense(H.block(3));
  }
  return false;
}

}  // namespace fracfem
