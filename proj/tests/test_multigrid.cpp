#include <doctest.h>

#include <random>

#include <Eigen/Eigenvalues>

#include "fracfem/multigrid.hpp"
#include "fracfem/problems.hpp"

using namespace fracfem;

namespace {

FracProblem riesz(double a) { return FracProblem::riesz(a, [](double) { return 1.0; }); }

// One lexicographic Gauss-Seidel sweep, forward or backward.
Vector dense_gs(const Matrix& A, const Vector& b, Vector x, bool forward) {
  const Eigen::Index n = A.rows();
  for (Eigen::Index s = 0; s < n; ++s) {
    const Eigen::Index i = forward ? s : n - 1 - s;
    x(i) += (b(i) - A.row(i).dot(x)) / A(i, i);
  }
  return x;
}

Vector random_vector(std::mt19937& rng, Eigen::Index n) {
  std::normal_distribution<double> d;
  Vector v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

}  // namespace

TEST_CASE("smoothers match dense Gauss-Seidel") {
  std::mt19937 rng(21);
  for (int t = 0; t < 6; ++t) {
    const double a = 1.1 + 0.15 * t;
    const Mesh1D m = Mesh1D::uniform(0, 1, 64);
    FracProblem p = riesz(a);
    if (t % 2) p.kappa2 = 0.3 * p.kappa1;
    const HMatrix H = assemble_hmatrix(m, p, {6, 8});
    const Matrix D = densify(H);
    const Vector b = random_vector(rng, 63), x = random_vector(rng, 63);
    const Vector f = fgs_smooth(H, b, x), g = bgs_smooth(H, b, x);
    CHECK((f - dense_gs(D, b, x, true)).norm() <= 1e-12 * f.norm());
    CHECK((g - dense_gs(D, b, x, false)).norm() <= 1e-12 * g.norm());
  }
}

TEST_CASE("smoother special cases") {
  HMatrix H;
  H.kind = BlockKind::Full;
  H.rows = H.cols = {0, 4};
  H.full = Vector::LinSpaced(4, 1.0, 4.0).asDiagonal();
  const Vector b = Vector::LinSpaced(4, 2.0, 5.0);
  const Vector x = fgs_smooth(H, b, Vector::Zero(4));
  CHECK((H.full * x - b).norm() < 1e-15);

  const Mesh1D m = Mesh1D::uniform(0, 1, 40);
  const HMatrix A = assemble_hmatrix(m, riesz(1.5), {6, 8});
  const Vector u = Vector::LinSpaced(39, -1.0, 1.0);
  const Vector rhs = hmatvec(A, u);
  CHECK((bgs_smooth(A, rhs, u) - u).norm() <= 1e-12 * u.norm());
  CHECK((fgs_smooth(A, rhs, u) - u).norm() <= 1e-12 * u.norm());

  H.full(2, 2) = 0.0;
  CHECK_THROWS_AS(fgs_smooth(H, b, Vector::Zero(4)), std::runtime_error);
}

TEST_CASE("symmetric Gauss-Seidel contracts in the energy norm") {
  const Mesh1D m = Mesh1D::uniform(0, 1, 65);
  const HMatrix H = assemble_hmatrix(m, riesz(1.5), {8, 16});
  const Matrix D = densify(H);
  const Matrix E0 = -D;  // the Riesz operator is negative definite
  Matrix S(64, 64);
  for (Eigen::Index i = 0; i < 64; ++i) {
    S.col(i) = bgs_smooth(H, Vector::Zero(64), fgs_smooth(H, Vector::Zero(64), Vector::Unit(64, i)));
  }
  CHECK(S.eigenvalues().cwiseAbs().maxCoeff() < 1.0);

  std::mt19937 rng(4);
  Vector e = random_vector(rng, 64);
  double prev = e.dot(E0 * e);
  for (int s = 0; s < 10; ++s) {
    e = s % 2 ? bgs_smooth(H, Vector::Zero(64), e) : fgs_smooth(H, Vector::Zero(64), e);
    const double now = e.dot(E0 * e);
    CHECK(now <= prev * (1 + 1e-12));
    prev = now;
  }
}

TEST_CASE("hierarchy construction") {
  const FracProblem p = riesz(1.5);
  const MgHierarchy hier(MeshHierarchy::uniform(0, 1, 8, 5), p, {8, 32});
  CHECK(hier.size(0) <= 31);
  CHECK(hier.num_levels() == 3);
  for (std::size_t l = 1; l < hier.num_levels(); ++l) {
    const Matrix I = hier.prolongation(l);
    CHECK((I - Matrix(prolongation(hier.mesh(l - 1), hier.mesh(l)))).norm() == 0.0);
  }
  const Vector x = Vector::Ones(static_cast<Eigen::Index>(hier.size(0)));
  CHECK((hier.apply(0, x) - assemble_dense(hier.mesh(0), p) * x).norm() == 0.0);

  // Growing a hierarchy level by level gives the same operators.
  MgHierarchy grown(MeshHierarchy(Mesh1D::uniform(0, 1, 32)), p, {8, 32});
  grown.add_level(Mesh1D::uniform(0, 1, 64));
  grown.add_level(Mesh1D::uniform(0, 1, 128));
  REQUIRE(grown.num_levels() == hier.num_levels());
  CHECK((densify(grown.op(2)) - densify(hier.op(2))).norm() == 0.0);
  CHECK_THROWS_AS(grown.add_level(Mesh1D::uniform(0, 1, 256), grown.shared_op(1)), std::invalid_argument);
}

TEST_CASE("V-cycle") {
  const FracProblem p = riesz(1.5);
  std::mt19937 rng(3);

  const MgHierarchy single(MeshHierarchy(Mesh1D::uniform(0, 1, 32)), p, {8, 32});
  const Vector f0 = random_vector(rng, 31);
  const Vector u0 = vcycle(single, 0, f0, Vector::Zero(31));
  CHECK((single.coarse_matrix() * u0 - f0).norm() <= 1e-13 * f0.norm());
  const SolveResult one = solve(single, f0, 1e-12, 5);
  CHECK(one.iterations == 1);

  // Two levels, 31 and 63 unknowns: error contraction below one.
  const MgHierarchy two(MeshHierarchy::uniform(0, 1, 32, 2), p, {8, 16});
  const Matrix A = densify(two.op(1));
  for (int t = 0; t < 5; ++t) {
    const Vector u = random_vector(rng, 63);
    const Vector f = A * u;
    Vector x = Vector::Zero(63);
    double prev = u.norm();
    for (int it = 0; it < 4; ++it) {
      x = vcycle(two, 1, f, x);
      const double err = (x - u).norm();
      CHECK(err < prev);
      prev = err;
    }
  }
}

TEST_CASE("outer iterations") {
  const RegisteredProblem ex = make_problem({"example1", 1.1});
  const Mesh1D fine = Mesh1D::uniform(0, 1, 256);
  const MgHierarchy hier(MeshHierarchy::by_coarsening(fine, 31), ex.problem, {10, 32});
  const Vector f = assemble_rhs(fine, ex.problem);

  const SolveResult zero = solve(hier, Vector::Zero(255), 1e-10, 10);
  CHECK(zero.iterations == 0);
  CHECK(zero.u.isZero(0.0));

  const SolveResult v = solve(hier, f, 1e-10, 100);
  CHECK(v.status == SolveStatus::Converged);
  CHECK(v.iterations >= 6);
  CHECK(v.iterations <= 12);
  CHECK((f - hmatvec(hier.op(hier.finest()), v.u)).norm() <= 1e-10 * f.norm());

  SolveOptions cg;
  cg.method = OuterIteration::PCG;
  const SolveResult c = solve(hier, f, 1e-10, 100, cg);
  CHECK(c.status == SolveStatus::Converged);
  CHECK(c.iterations <= v.iterations);
  CHECK((c.u - v.u).norm() <= 1e-8 * v.u.norm());

  const SolveResult cut = solve(hier, f, 1e-10, 2);
  CHECK(cut.status == SolveStatus::MaxIterations);
  CHECK(cut.iterations == 2);
  CHECK(cut.residuals.size() == 2);

  // Close to alpha = 1 the one-sided operator behaves like advection and
  // Gauss-Seidel stops smoothing, so the nonsymmetric case uses alpha = 1.5.
  FracProblem left = make_problem({"example3", 1.5}).problem;
  const MgHierarchy one_sided(MeshHierarchy::by_coarsening(fine, 31), left, {10, 32});
  const Vector g = assemble_rhs(fine, left);
  CHECK_THROWS_AS(solve(one_sided, g, 1e-10, 10, cg), std::invalid_argument);
  const SolveResult os = solve(one_sided, g, 1e-10, 100);
  CHECK(os.status == SolveStatus::Converged);
  CHECK(os.iterations <= 20);
}

TEST_CASE("V-cycle work grows like N log N") {
  // One cycle touches every stored scalar of every level a fixed number of
  // times, so summed storage is a deterministic proxy for its cost.
  const FracProblem p = riesz(1.5);
  auto work = [&](std::size_t n) {
    const MgHierarchy h(MeshHierarchy::by_coarsening(Mesh1D::uniform(0, 1, n), 31), p, {10, 32});
    const Vector x = vcycle(h, h.finest(), Vector::Ones(static_cast<Eigen::Index>(n - 1)),
                            Vector::Zero(static_cast<Eigen::Index>(n - 1)));
    CHECK(x.allFinite());
    std::size_t s = 0;
    for (std::size_t l = 1; l <= h.finest(); ++l) s += storage_scalars(h.op(l));
    return static_cast<double>(s);
  };
  const double ratio = work(4096) / work(1024);
  CHECK(ratio >= 4.0);
  CHECK(ratio <= 4.0 * 1.2 * 1.4);
}
