#pragma once

// Binary cluster tree over the unknowns and the admissible block partition.

#include <cstddef>
#include <vector>

#include "fracfem/mesh.hpp"

namespace fracfem {

struct ClusterNode {
  IndexRange range;
  double x_lo = 0.0;  // bounding interval: union of the basis supports
  double x_hi = 0.0;
  int child[2] = {-1, -1};
  int depth = 0;
  bool is_leaf() const { return child[0] < 0; }
  double diam() const { return x_hi - x_lo; }
};

class ClusterTree {
 public:
  /// Index-midpoint bisection until clusters have at most n_min unknowns.
  ClusterTree(const Mesh1D& mesh, std::size_t n_min);

  const ClusterNode& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  const ClusterNode& root() const { return nodes_.front(); }
  std::size_t size() const { return nodes_.size(); }
  std::size_t n_min() const { return n_min_; }
  int depth() const { return depth_; }
  std::size_t num_leaves() const;

 private:
  int build(const Mesh1D& mesh, IndexRange range, int depth);

  std::vector<ClusterNode> nodes_;
  std::size_t n_min_;
  int depth_ = 0;
};

inline ClusterTree build_cluster_tree(const Mesh1D& mesh, std::size_t n_min) {
  return ClusterTree(mesh, n_min);
}

/// Distance between the bounding intervals (0 when they overlap or touch).
double cluster_distance(const ClusterNode& a, const ClusterNode& b);

/// diam(row) <= dist(row, col).
bool admissible(const ClusterNode& row, const ClusterNode& col);

enum class BlockKind { Full, LowRank, Quad };

struct BlockNode {
  int row = 0;  // cluster ids
  int col = 0;
  BlockKind kind = BlockKind::Full;
  int child[4] = {-1, -1, -1, -1};  // 11, 12, 21, 22 when kind == Quad
};

class BlockTree {
 public:
  /// Admissible pair -> LowRank, a leaf on either side -> Full, else Quad.
  explicit BlockTree(const ClusterTree& tree);

  const ClusterTree& clusters() const { return *tree_; }
  const BlockNode& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  const BlockNode& root() const { return nodes_.front(); }
  std::size_t size() const { return nodes_.size(); }
  std::size_t count(BlockKind kind) const;

 private:
  int build(int row, int col);

  const ClusterTree* tree_;
  std::vector<BlockNode> nodes_;
};

inline BlockTree build_block_partition(const ClusterTree& tree) { return BlockTree(tree); }

}  // namespace fracfem
