#include "fracfem/multigrid.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace fracfem {

MgHierarchy::MgHierarchy(const MeshHierarchy& meshes, const FracProblem& problem, const HMatrixOptions& hopts,
                         std::size_t coarse_cap)
    : problem_(problem), hopts_(hopts) {
  problem_.validate();
  std::size_t first = 0;
  for (std::size_t l = 0; l < meshes.num_levels(); ++l) {
    if (meshes.level(l).num_interior() <= coarse_cap) first = l;
  }
  meshes_.push_back(meshes.level(first));
  ops_.emplace_back();
  prolongations_.emplace_back();
  coarse_ = assemble_dense(meshes_.front(), problem_);
  lu_.compute(coarse_);
  for (std::size_t l = first + 1; l < meshes.num_levels(); ++l) add_level(meshes.level(l));
}

void MgHierarchy::add_level(const Mesh1D& finer, std::shared_ptr<const HMatrix> op) {
  prolongations_.push_back(fracfem::prolongation(meshes_.back(), finer));
  meshes_.push_back(finer);
  if (!op) op = std::make_shared<const HMatrix>(assemble_hmatrix(meshes_.back(), problem_, hopts_));
  if (op->num_rows() != finer.num_interior()) throw std::invalid_argument("MgHierarchy: operator size mismatch");
  ops_.push_back(std::move(op));
}

Vector MgHierarchy::apply(std::size_t l, const Vector& x) const {
  if (l == 0) return coarse_ * x;
  return hmatvec(*ops_[l], x);
}

namespace {

// In place: r <- L^{-1} r over the diagonal blocks of H.
void lower_solve(const HMatrix& H, double* r) {
  if (H.kind == BlockKind::Full) {
    const auto n = H.full.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
      double s = r[i];
      for (Eigen::Index j = 0; j < i; ++j) s -= H.full(i, j) * r[j];
      const double d = H.full(i, i);
      if (d == 0.0) throw std::runtime_error("fgs_smooth: zero diagonal entry");
      r[i] = s / d;
    }
    return;
  }
  if (H.kind == BlockKind::LowRank) throw std::logic_error("fgs_smooth: low-rank diagonal block");
  const HMatrix& h11 = H.block(0);
  const HMatrix& h21 = H.block(2);
  const HMatrix& h22 = H.block(3);
  lower_solve(h11, r);
  double* r2 = r + h11.num_rows();
  hmatvec_add(h21, r, r2, -1.0);
  lower_solve(h22, r2);
}

void upper_solve(const HMatrix& H, double* r) {
  if (H.kind == BlockKind::Full) {
    const auto n = H.full.rows();
    for (Eigen::Index i = n - 1; i >= 0; --i) {
      double s = r[i];
      for (Eigen::Index j = i + 1; j < n; ++j) s -= H.full(i, j) * r[j];
      const double d = H.full(i, i);
      if (d == 0.0) throw std::runtime_error("bgs_smooth: zero diagonal entry");
      r[i] = s / d;
    }
    return;
  }
  if (H.kind == BlockKind::LowRank) throw std::logic_error("bgs_smooth: low-rank diagonal block");
  const HMatrix& h11 = H.block(0);
  const HMatrix& h12 = H.block(1);
  const HMatrix& h22 = H.block(3);
  double* r2 = r + h11.num_rows();
  upper_solve(h22, r2);
  hmatvec_add(h12, r2, r, -1.0);
  upper_solve(h11, r);
}

}  // namespace

Vector fgs_smooth(const HMatrix& H, const Vector& b, const Vector& x) {
  Vector z = b - hmatvec(H, x);
  lower_solve(H, z.data());
  return x + z;
}

Vector bgs_smooth(const HMatrix& H, const Vector& b, const Vector& x) {
  Vector z = b - hmatvec(H, x);
  upper_solve(H, z.data());
  return x + z;
}

Vector vcycle(const MgHierarchy& hier, std::size_t level, const Vector& f, const Vector& x) {
  if (level == 0) return hier.coarse_solve(f);
  const HMatrix& H = hier.op(level);
  Vector u = fgs_smooth(H, f, x);
  const Vector r = f - hmatvec(H, u);
  const SparseMatrix& P = hier.prolongation(level);
  const Vector rc = P.transpose() * r;
  const Vector ec = vcycle(hier, level - 1, rc, Vector::Zero(rc.size()));
  u += P * ec;
  return bgs_smooth(H, f, u);
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged:
      return "converged";
    case SolveStatus::MaxIterations:
      return "max_iterations";
    case SolveStatus::Breakdown:
      return "breakdown";
  }
  return "unknown";
}

namespace {

void log_row(const SolveOptions& opts, std::size_t level, int it, double rel) {
  if (opts.log) *opts.log << level << ',' << it << ',' << rel << '\n';
}

}  // namespace

SolveResult solve(const MgHierarchy& hier, const Vector& f, double tol, int max_iterations,
                  const SolveOptions& opts) {
  if (!(tol > 0.0)) throw std::invalid_argument("solve: tol must be positive");
  const std::size_t J = hier.finest();
  if (static_cast<std::size_t>(f.size()) != hier.size(J)) throw std::invalid_argument("solve: rhs size mismatch");
  SolveResult res;
  res.u = Vector::Zero(f.size());
  const double fnorm = f.norm();
  if (fnorm == 0.0) return res;
  if (!std::isfinite(fnorm)) {
    res.status = SolveStatus::Breakdown;
    return res;
  }
  if (J == 0) {
    res.u = hier.coarse_solve(f);
    res.iterations = 1;
    const double rel = (f - hier.apply(0, res.u)).norm() / fnorm;
    res.residuals.push_back(rel);
    log_row(opts, J, 1, rel);
    res.status = std::isfinite(rel) && rel <= tol ? SolveStatus::Converged : SolveStatus::Breakdown;
    return res;
  }

  if (opts.method == OuterIteration::VCycle) {
    res.status = SolveStatus::MaxIterations;
    for (int it = 1; it <= max_iterations; ++it) {
      res.u = vcycle(hier, J, f, res.u);
      const double rel = (f - hier.apply(J, res.u)).norm() / fnorm;
      res.iterations = it;
      res.residuals.push_back(rel);
      log_row(opts, J, it, rel);
      if (!std::isfinite(rel)) {
        res.status = SolveStatus::Breakdown;
        break;
      }
      if (rel <= tol) {
        res.status = SolveStatus::Converged;
        break;
      }
    }
    return res;
  }

  if (!hier.problem().symmetric()) throw std::invalid_argument("solve: PCG needs kappa1 == kappa2");
  Vector r = f;
  Vector z = vcycle(hier, J, r, Vector::Zero(r.size()));
  Vector p = z;
  double rz = r.dot(z);
  res.status = SolveStatus::MaxIterations;
  for (int it = 1; it <= max_iterations; ++it) {
    const Vector Ap = hier.apply(J, p);
    const double pAp = p.dot(Ap);
    if (pAp == 0.0 || !std::isfinite(pAp)) {
      res.status = SolveStatus::Breakdown;
      break;
    }
    const double step = rz / pAp;
    res.u += step * p;
    r -= step * Ap;
    const double rel = r.norm() / fnorm;
    res.iterations = it;
    res.residuals.push_back(rel);
    log_row(opts, J, it, rel);
    if (!std::isfinite(rel)) {
      res.status = SolveStatus::Breakdown;
      break;
    }
    if (rel <= tol) {
      res.status = SolveStatus::Converged;
      break;
    }
    z = vcycle(hier, J, r, Vector::Zero(r.size()));
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  return res;
}

}  // namespace fracfem
