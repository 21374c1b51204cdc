#include <doctest.h>

#include <random>
#include <sstream>
#include <vector>

#include "fracfem/mesh.hpp"
#include "fracfem/norms.hpp"

using namespace fracfem;

namespace {

std::vector<double> nodes_of(const Mesh1D& m) { return {m.nodes().begin(), m.nodes().end()}; }

Mesh1D random_mesh(std::mt19937& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.2, 1.0);
  std::vector<double> x{0.0};
  for (std::size_t i = 0; i < n; ++i) x.push_back(x.back() + u(rng));
  for (auto& v : x) v /= x.back();
  return Mesh1D(x);
}

}  // namespace

TEST_CASE("uniform mesh") {
  const Mesh1D m = Mesh1D::uniform(0, 1, 4);
  CHECK(nodes_of(m) == std::vector<double>{0, 0.25, 0.5, 0.75, 1});
  CHECK(m.num_interior() == 3);
  CHECK(Mesh1D::uniform(0, 1, 256).max_h() == doctest::Approx(1.0 / 256).epsilon(1e-14));
  CHECK_THROWS_AS(Mesh1D::uniform(0, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(Mesh1D::uniform(1, 0, 4), std::invalid_argument);
  CHECK_THROWS_AS(Mesh1D({0.0, 0.5, 0.5, 1.0}), std::invalid_argument);
}

TEST_CASE("bisect") {
  const Mesh1D m({0.0, 0.5, 1.0});
  const std::size_t one[] = {1}, both[] = {1, 2}, bad[] = {3};
  CHECK(nodes_of(bisect(m, one)) == std::vector<double>{0, 0.25, 0.5, 1});
  CHECK(nodes_of(bisect(m, both)) == std::vector<double>{0, 0.25, 0.5, 0.75, 1});
  CHECK(bisect(m, std::span<const std::size_t>{}) == m);
  CHECK_THROWS_AS(bisect(m, bad), std::out_of_range);
  const Mesh1D u = Mesh1D::uniform(0, 1, 16);
  CHECK(bisect_all(u) == Mesh1D::uniform(0, 1, 32));
  CHECK(is_nested(u, bisect(u, one)));
}

TEST_CASE("grading closure") {
  // Elements 1..4 of sizes 1/8, 1/8, 1/4, 1/2.
  const Mesh1D m({0.0, 0.125, 0.25, 0.5, 1.0});
  const std::size_t first[] = {1};
  // Halving element 1 leaves 1/8 next to 1/16: fine.
  CHECK(grading_closure(m, first) == std::vector<std::size_t>{1});
  const std::size_t second[] = {2};
  // Element 2 becomes 1/16, so element 3 (1/4) must follow, then element 4.
  CHECK(grading_closure(m, second) == std::vector<std::size_t>{2, 3, 4});
  CHECK(grading_closure(m, second, 8.0) == std::vector<std::size_t>{2});
  CHECK(grading_closure(m, std::span<const std::size_t>{}).empty());

  std::mt19937 rng(7);
  Mesh1D g = Mesh1D::uniform(0, 1, 8);
  for (int it = 0; it < 30; ++it) {
    const std::size_t e = std::uniform_int_distribution<std::size_t>(1, g.num_elements())(rng);
    const std::size_t mk[] = {e};
    g = bisect(g, grading_closure(g, mk));
    for (std::size_t i = 1; i < g.num_elements(); ++i) {
      const double r = g.h(i) / g.h(i + 1);
      CHECK(r <= 2.0);
      CHECK(r >= 0.5);
    }
  }
}

TEST_CASE("prolongation") {
  const Mesh1D c({0.0, 0.5, 1.0});
  SparseMatrix I = prolongation(c, c);
  CHECK(Matrix(I).isIdentity());

  I = prolongation(c, Mesh1D::uniform(0, 1, 4));
  CHECK(I.rows() == 3);
  CHECK(I.cols() == 1);
  CHECK(Matrix(I)(0, 0) == 0.5);
  CHECK(Matrix(I)(1, 0) == 1.0);
  CHECK(Matrix(I)(2, 0) == 0.5);

  I = prolongation(c, Mesh1D({0.0, 0.25, 0.5, 1.0}));
  CHECK(Matrix(I)(0, 0) == 0.5);
  CHECK(Matrix(I)(1, 0) == 1.0);

  CHECK_THROWS_AS(prolongation(c, Mesh1D({0.0, 0.3, 1.0})), std::invalid_argument);
}

TEST_CASE("prolongation reproduces coarse functions") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Mesh1D coarse = random_mesh(rng, 12);
    std::vector<std::size_t> mk;
    for (std::size_t e = 1; e <= coarse.num_elements(); ++e) {
      if (rng() % 2) mk.push_back(e);
    }
    const Mesh1D fine = bisect(bisect(coarse, mk), std::vector<std::size_t>{1, 2});
    REQUIRE(is_nested(coarse, fine));
    Vector v = Vector::Random(static_cast<Eigen::Index>(coarse.num_interior()));
    const Vector w = prolongation(coarse, fine) * v;
    Vector vb = Vector::Zero(static_cast<Eigen::Index>(coarse.num_nodes()));
    vb.segment(1, v.size()) = v;
    for (std::size_t d = 0; d < fine.num_interior(); ++d) {
      CHECK(w(static_cast<Eigen::Index>(d)) == doctest::Approx(interpolate(coarse, vb, fine.dof_node(d))).epsilon(1e-14));
    }
  }
}

TEST_CASE("hierarchies") {
  const MeshHierarchy u = MeshHierarchy::uniform(0, 1, 4, 4);
  REQUIRE(u.num_levels() == 4);
  CHECK(u.finest() == Mesh1D::uniform(0, 1, 32));
  for (std::size_t l = 1; l < u.num_levels(); ++l) {
    CHECK(is_nested(u.level(l - 1), u.level(l)));
    CHECK(u.prolongation_to(l).rows() == static_cast<Eigen::Index>(u.level(l).num_interior()));
  }
  const Mesh1D g = graded_mesh(0, 1, 300, 2.0);
  const MeshHierarchy h = MeshHierarchy::by_coarsening(g, 31);
  CHECK(h.finest() == g);
  CHECK(h.level(0).num_interior() <= 31);
  for (std::size_t l = 1; l < h.num_levels(); ++l) CHECK(is_nested(h.level(l - 1), h.level(l)));
}

TEST_CASE("mesh io round trip") {
  const Mesh1D m = graded_mesh(0, 1, 50, 3.0);
  std::stringstream s;
  write_mesh(s, m);
  CHECK(read_mesh(s) == m);
}
