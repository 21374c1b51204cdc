#include "fracfem/cluster.hpp"

#include <algorithm>
#include <stdexcept>

namespace fracfem {

ClusterTree::ClusterTree(const Mesh1D& mesh, std::size_t n_min) : n_min_(n_min) {
  if (n_min < 2) throw std::invalid_argument("ClusterTree: n_min must be >= 2");
  nodes_.reserve(4 * (mesh.num_interior() / n_min + 1));
  build(mesh, IndexRange{0, mesh.num_interior()}, 0);
}

int ClusterTree::build(const Mesh1D& mesh, IndexRange range, int depth) {
  const int id = static_cast<int>(nodes_.size());
  ClusterNode node;
  node.range = range;
  node.x_lo = mesh.node(range.lo);
  node.x_hi = mesh.node(range.hi + 1);
  node.depth = depth;
  nodes_.push_back(node);
  depth_ = std::max(depth_, depth);
  if (range.size() > n_min_) {
    const std::size_t mid = range.lo + range.size() / 2;
    const int left = build(mesh, IndexRange{range.lo, mid}, depth + 1);
    const int right = build(mesh, IndexRange{mid, range.hi}, depth + 1);
    nodes_[static_cast<std::size_t>(id)].child[0] = left;
    nodes_[static_cast<std::size_t>(id)].child[1] = right;
  }
  return id;
}

std::size_t ClusterTree::num_leaves() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(),
                                                [](const ClusterNode& n) { return n.is_leaf(); }));
}

double cluster_distance(const ClusterNode& a, const ClusterNode& b) {
  return std::max({0.0, b.x_lo - a.x_hi, a.x_lo - b.x_hi});
}

bool admissible(const ClusterNode& row, const ClusterNode& col) {
  const double dist = cluster_distance(row, col);
  return dist > 0.0 && row.diam() <= dist;
}

BlockTree::BlockTree(const ClusterTree& tree) : tree_(&tree) { build(0, 0); }

int BlockTree::build(int row, int col) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(BlockNode{row, col, BlockKind::Full, {-1, -1, -1, -1}});
  const auto& r = tree_->node(row);
  const auto& c = tree_->node(col);
  if (admissible(r, c)) {
    nodes_[static_cast<std::size_t>(id)].kind = BlockKind::LowRank;
  } else if (!r.is_leaf() && !c.is_leaf()) {
    int kids[4];
    kids[0] = build(r.child[0], c.child[0]);
    kids[1] = build(r.child[0], c.child[1]);
    kids[2] = build(r.child[1], c.child[0]);
    kids[3] = build(r.child[1], c.child[1]);
    auto& self = nodes_[static_cast<std::size_t>(id)];
    self.kind = BlockKind::Quad;
    std::copy(kids, kids + 4, self.child);
  }
  return id;
}

std::size_t BlockTree::count(BlockKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [kind](const BlockNode& b) { return b.kind == kind; }));
}

}  // namespace fracfem
