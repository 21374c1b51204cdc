#pragma once

// One-dimensional meshes, bisection refinement and nested hierarchies.
//
// Index conventions used throughout the library:
//   * nodes are numbered 0 .. N+1, x_0 = b and x_{N+1} = c are boundary nodes;
//   * element i (1 <= i <= N+1) is [x_{i-1}, x_i] with size h_i = x_i - x_{i-1};
//   * unknown (dof) d (0 <= d < N) is the coefficient of the hat function of
//     node d+1. Vectors of unknowns are therefore 0-based and have length N.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

namespace fracfem {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Half-open range [lo, hi) of unknown indices.
struct IndexRange {
  std::size_t lo = 0;
  std::size_t hi = 0;
  std::size_t size() const { return hi - lo; }
  bool operator==(const IndexRange&) const = default;
};

class Mesh1D {
 public:
  /// Takes ownership of a strictly increasing node sequence with at least
  /// three entries (one interior node). Throws std::invalid_argument otherwise.
  explicit Mesh1D(std::vector<double> nodes);

  static Mesh1D uniform(double b, double c, std::size_t n_elements);

  std::size_t num_interior() const { return nodes_.size() - 2; }
  std::size_t num_elements() const { return nodes_.size() - 1; }
  std::size_t num_nodes() const { return nodes_.size(); }

  double node(std::size_t i) const { return nodes_[i]; }
  std::span<const double> nodes() const { return nodes_; }

  /// Size of element i = [x_{i-1}, x_i], 1 <= i <= N+1.
  double h(std::size_t i) const { return nodes_[i] - nodes_[i - 1]; }
  double min_h() const;
  double max_h() const;

  double left() const { return nodes_.front(); }
  double right() const { return nodes_.back(); }

  /// Coordinate of the node carrying unknown d.
  double dof_node(std::size_t d) const { return nodes_[d + 1]; }

  bool operator==(const Mesh1D&) const = default;

 private:
  std::vector<double> nodes_;
};

/// Bisects every marked element (1-based element indices, duplicates ignored).
Mesh1D bisect(const Mesh1D& mesh, std::span<const std::size_t> marked);

/// Extends a marked set until every unmarked element next to a marked one is
/// at most `ratio` times longer than that neighbour after bisection. Pairs of
/// unmarked elements are left alone. Returns a sorted set.
std::vector<std::size_t> grading_closure(const Mesh1D& mesh, std::span<const std::size_t> marked,
                                         double ratio = 2.0);

/// Uniform refinement: bisects every element.
Mesh1D bisect_all(const Mesh1D& mesh);

/// True when every node of `coarse` is (bitwise) a node of `fine` and both
/// meshes share the same end points.
bool is_nested(const Mesh1D& coarse, const Mesh1D& fine);

/// Matrix of the inclusion V(coarse) -> V(fine), size N_fine x N_coarse.
/// Entry (r, c) is the value of coarse hat c at fine node r+1.
/// Throws std::invalid_argument if the meshes are not nested.
SparseMatrix prolongation(const Mesh1D& coarse, const Mesh1D& fine);

/// Nested sequence T_0 <= T_1 <= ... <= T_J with the prolongations between
/// consecutive levels (prolongations[l-1] maps level l-1 to level l).
class MeshHierarchy {
 public:
  explicit MeshHierarchy(Mesh1D coarsest);
  explicit MeshHierarchy(std::vector<Mesh1D> levels);

  /// Repeated uniform bisection of a uniform coarse mesh.
  static MeshHierarchy uniform(double b, double c, std::size_t coarse_elements,
                               std::size_t n_levels);

  /// Builds a hierarchy below `fine` by repeatedly dropping every other
  /// interior node until at most `coarse_cap` unknowns remain.
  static MeshHierarchy by_coarsening(const Mesh1D& fine, std::size_t coarse_cap);

  /// Appends a refinement of the current finest level.
  void push(Mesh1D finer);

  std::size_t num_levels() const { return levels_.size(); }
  const Mesh1D& level(std::size_t l) const { return levels_[l]; }
  const Mesh1D& finest() const { return levels_.back(); }
  const SparseMatrix& prolongation_to(std::size_t l) const { return prolongations_[l - 1]; }

 private:
  std::vector<Mesh1D> levels_;
  std::vector<SparseMatrix> prolongations_;
};

/// One coordinate per line, 17 significant digits.
void write_mesh(std::ostream& out, const Mesh1D& mesh);
Mesh1D read_mesh(std::istream& in);

}  // namespace fracfem
