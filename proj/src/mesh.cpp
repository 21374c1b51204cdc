#include "fracfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace fracfem {

Mesh1D::Mesh1D(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.size() < 3) {
    throw std::invalid_argument("Mesh1D: need at least one interior node");
  }
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (!(nodes_[i] > nodes_[i - 1]) || !std::isfinite(nodes_[i])) {
      throw std::invalid_argument("Mesh1D: nodes must be finite and strictly increasing (index " +
                                  std::to_string(i) + ")");
    }
  }
}

Mesh1D Mesh1D::uniform(double b, double c, std::size_t n_elements) {
  if (n_elements < 2) throw std::invalid_argument("Mesh1D::uniform: need at least 2 elements");
  if (!(c > b)) throw std::invalid_argument("Mesh1D::uniform: empty interval");
  std::vector<double> x(n_elements + 1);
  const double len = c - b;
  for (std::size_t i = 0; i <= n_elements; ++i) {
    x[i] = b + len * (static_cast<double>(i) / static_cast<double>(n_elements));
  }
  x.front() = b;
  x.back() = c;
  return Mesh1D(std::move(x));
}

double Mesh1D::min_h() const {
  double m = h(1);
  for (std::size_t i = 2; i < nodes_.size(); ++i) m = std::min(m, h(i));
  return m;
}

double Mesh1D::max_h() const {
  double m = h(1);
  for (std::size_t i = 2; i < nodes_.size(); ++i) m = std::max(m, h(i));
  return m;
}

Mesh1D bisect(const Mesh1D& mesh, std::span<const std::size_t> marked) {
  std::vector<char> flag(mesh.num_elements() + 1, 0);
  for (auto e : marked) {
    if (e < 1 || e > mesh.num_elements()) {
      throw std::out_of_range("bisect: element index " + std::to_string(e) + " out of range");
    }
    flag[e] = 1;
  }
  std::vector<double> x;
  x.reserve(mesh.num_nodes() + marked.size());
  x.push_back(mesh.node(0));
  for (std::size_t e = 1; e <= mesh.num_elements(); ++e) {
    if (flag[e]) {
      const double mid = 0.5 * (mesh.node(e - 1) + mesh.node(e));
      if (!(mid > mesh.node(e - 1) && mid < mesh.node(e))) {
        throw std::runtime_error("bisect: element " + std::to_string(e) +
                                 " is too small to be bisected in double precision");
      }
      x.push_back(mid);
    }
    x.push_back(mesh.node(e));
  }
  return Mesh1D(std::move(x));
}

std::vector<std::size_t> grading_closure(const Mesh1D& mesh, std::span<const std::size_t> marked,
                                         double ratio) {
  if (!(ratio >= 1.0)) throw std::invalid_argument("grading_closure: ratio must be >= 1");
  const std::size_t ne = mesh.num_elements();
  std::vector<char> flag(ne + 2, 0);
  for (auto e : marked) {
    if (e < 1 || e > ne) {
      throw std::out_of_range("grading_closure: element index " + std::to_string(e) + " out of range");
    }
    flag[e] = 1;
  }
  auto after = [&](std::size_t e) { return flag[e] ? 0.5 * mesh.h(e) : mesh.h(e); };
  // Marking e can only unbalance e-1 and e+1, so a stack of fresh marks suffices.
  std::vector<std::size_t> work(marked.begin(), marked.end());
  auto check = [&](std::size_t e, std::size_t nb) {
    if (e < 1 || e > ne || flag[e]) return;
    if (mesh.h(e) > ratio * after(nb)) {
      flag[e] = 1;
      work.push_back(e);
    }
  };
  while (!work.empty()) {
    const std::size_t e = work.back();
    work.pop_back();
    check(e - 1, e);
    check(e + 1, e);
  }
  std::vector<std::size_t> out;
  for (std::size_t e = 1; e <= ne; ++e) {
    if (flag[e]) out.push_back(e);
  }
  return out;
}

Mesh1D bisect_all(const Mesh1D& mesh) {
  std::vector<std::size_t> all(mesh.num_elements());
  for (std::size_t e = 0; e < all.size(); ++e) all[e] = e + 1;
  return bisect(mesh, all);
}

bool is_nested(const Mesh1D& coarse, const Mesh1D& fine) {
  if (coarse.left() != fine.left() || coarse.right() != fine.right()) return false;
  std::size_t j = 0;
  for (double xc : coarse.nodes()) {
    while (j < fine.num_nodes() && fine.node(j) < xc) ++j;
    if (j == fine.num_nodes() || fine.node(j) != xc) return false;
  }
  return true;
}

SparseMatrix prolongation(const Mesh1D& coarse, const Mesh1D& fine) {
  if (!is_nested(coarse, fine)) {
    throw std::invalid_argument("prolongation: fine mesh is not a refinement of the coarse mesh");
  }
  const std::size_t nf = fine.num_interior();
  const std::size_t nc = coarse.num_interior();
  const std::size_t last_coarse = coarse.num_nodes() - 1;
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(2 * nf);

  std::size_t k = 1;  // coarse element [X_{k-1}, X_k] containing the fine node
  for (std::size_t r = 1; r <= nf; ++r) {
    const double x = fine.node(r);
    while (coarse.node(k) < x) ++k;
    if (coarse.node(k) == x) {
      if (k != last_coarse) entries.emplace_back(r - 1, k - 1, 1.0);
      continue;
    }
    const double xl = coarse.node(k - 1);
    const double xr = coarse.node(k);
    const double len = xr - xl;
    if (k - 1 >= 1) entries.emplace_back(r - 1, k - 2, (xr - x) / len);
    if (k <= nc) entries.emplace_back(r - 1, k - 1, (x - xl) / len);
  }
  SparseMatrix p(static_cast<Eigen::Index>(nf), static_cast<Eigen::Index>(nc));
  p.setFromTriplets(entries.begin(), entries.end());
  return p;
}

MeshHierarchy::MeshHierarchy(Mesh1D coarsest) { levels_.push_back(std::move(coarsest)); }

MeshHierarchy::MeshHierarchy(std::vector<Mesh1D> levels) {
  if (levels.empty()) throw std::invalid_argument("MeshHierarchy: no levels");
  levels_.push_back(std::move(levels.front()));
  for (std::size_t l = 1; l < levels.size(); ++l) push(std::move(levels[l]));
}

MeshHierarchy MeshHierarchy::uniform(double b, double c, std::size_t coarse_elements,
                                     std::size_t n_levels) {
  MeshHierarchy hier(Mesh1D::uniform(b, c, coarse_elements));
  for (std::size_t l = 1; l < n_levels; ++l) hier.push(bisect_all(hier.finest()));
  return hier;
}

MeshHierarchy MeshHierarchy::by_coarsening(const Mesh1D& fine, std::size_t coarse_cap) {
  std::vector<Mesh1D> chain{fine};
  while (chain.back().num_interior() > coarse_cap) {
    const auto& m = chain.back();
    if (m.num_elements() < 4) break;
    std::vector<double> x;
    x.reserve(m.num_nodes() / 2 + 2);
    for (std::size_t i = 0; i < m.num_nodes(); i += 2) x.push_back(m.node(i));
    if (x.back() != m.right()) x.push_back(m.right());
    chain.emplace_back(std::move(x));
  }
  std::reverse(chain.begin(), chain.end());
  return MeshHierarchy(std::move(chain));
}

void MeshHierarchy::push(Mesh1D finer) {
  prolongations_.push_back(prolongation(levels_.back(), finer));
  levels_.push_back(std::move(finer));
}

void write_mesh(std::ostream& out, const Mesh1D& mesh) {
  const auto old = out.precision(17);
  for (double x : mesh.nodes()) out << x << '\n';
  out.precision(old);
}

Mesh1D read_mesh(std::istream& in) {
  std::vector<double> x;
  double v;
  while (in >> v) x.push_back(v);
  return Mesh1D(std::move(x));
}

}  // namespace fracfem
