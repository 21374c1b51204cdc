#pragma once

// Geometric multigrid on per-level H-matrices: block Gauss-Seidel smoothers
// that recurse through the H-matrix structure, a dense LU solve on the
// coarsest level and an outer iteration to a relative residual tolerance.

#include <iosfwd>
#include <memory>
#include <vector>

#include <Eigen/LU>

#include "fracfem/hmatrix.hpp"

namespace fracfem {

/// Levels 0..J. Level 0 is dense and LU-factored; levels >= 1 hold an
/// H-matrix assembled directly on their own mesh. Operators are shared
/// pointers so that a growing hierarchy (adaptive refinement) reuses them.
class MgHierarchy {
 public:
  /// Uses the finest mesh level with at most coarse_cap unknowns as level 0
  /// and drops coarser ones. If every level is larger, the coarsest is used.
  MgHierarchy(const MeshHierarchy& meshes, const FracProblem& problem, const HMatrixOptions& hopts,
              std::size_t coarse_cap = 31);

  /// Appends a refinement of the finest mesh. When `op` is null the
  /// H-matrix is assembled here.
  void add_level(const Mesh1D& finer, std::shared_ptr<const HMatrix> op = nullptr);

  std::size_t num_levels() const { return meshes_.size(); }
  std::size_t finest() const { return meshes_.size() - 1; }
  const Mesh1D& mesh(std::size_t l) const { return meshes_[l]; }
  std::size_t size(std::size_t l) const { return meshes_[l].num_interior(); }

  /// Operator of level l >= 1.
  const HMatrix& op(std::size_t l) const { return *ops_[l]; }
  std::shared_ptr<const HMatrix> shared_op(std::size_t l) const { return ops_[l]; }
  const Matrix& coarse_matrix() const { return coarse_; }
  /// Maps level l-1 to level l.
  const SparseMatrix& prolongation(std::size_t l) const { return prolongations_[l]; }

  /// A_l x for any level.
  Vector apply(std::size_t l, const Vector& x) const;
  Vector coarse_solve(const Vector& f) const { return lu_.solve(f); }

  const FracProblem& problem() const { return problem_; }
  const HMatrixOptions& hmatrix_options() const { return hopts_; }

 private:
  FracProblem problem_;
  HMatrixOptions hopts_;
  std::vector<Mesh1D> meshes_;
  std::vector<std::shared_ptr<const HMatrix>> ops_;  // ops_[0] unused
  std::vector<SparseMatrix> prolongations_;          // prolongations_[0] unused
  Matrix coarse_;
  Eigen::PartialPivLU<Matrix> lu_;
};

/// x + L^{-1}(b - H x) with L the lower triangle of H (diagonal included),
/// solved block-wise through the H-matrix recursion.
/// Throws std::runtime_error on a zero diagonal entry.
Vector fgs_smooth(const HMatrix& H, const Vector& b, const Vector& x);

/// x + U^{-1}(b - H x) with U the upper triangle of H.
Vector bgs_smooth(const HMatrix& H, const Vector& b, const Vector& x);

/// One V-cycle on level l: forward Gauss-Seidel, restriction of the
/// residual, recursion from a zero guess, correction, backward Gauss-Seidel.
Vector vcycle(const MgHierarchy& hier, std::size_t level, const Vector& f, const Vector& x);

enum class SolveStatus { Converged, MaxIterations, Breakdown };
const char* to_string(SolveStatus s);

enum class OuterIteration { VCycle, PCG };

struct SolveOptions {
  OuterIteration method = OuterIteration::VCycle;
  std::ostream* log = nullptr;  // CSV rows "level,iteration,relative_residual"
};

struct SolveResult {
  Vector u;
  int iterations = 0;
  SolveStatus status = SolveStatus::Converged;
  std::vector<double> residuals;  // relative residual after each iteration
};

/// Iterates from u = 0 on the finest level until ||f - A u|| <= tol ||f||.
/// PCG requires a symmetric problem and throws std::invalid_argument otherwise.
SolveResult solve(const MgHierarchy& hier, const Vector& f, double tol, int max_iterations,
                  const SolveOptions& opts = {});

}  // namespace fracfem
