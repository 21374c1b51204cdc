#include "fracfem/norms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fracfem/multigrid.hpp"
#include "fracfem/quadrature.hpp"

namespace fracfem {

ErrorPair error_vs_exact(const Mesh1D& mesh, const Vector& u, const std::function<double(double)>& exact) {
  if (static_cast<std::size_t>(u.size()) != mesh.num_nodes()) throw std::invalid_argument("error_vs_exact: size mismatch");
  const auto& g = gauss_legendre(7);
  ErrorPair err;
  double sum = 0.0;
  for (std::size_t e = 1; e <= mesh.num_elements(); ++e) {
    const double a = mesh.node(e - 1), b = mesh.node(e), h = b - a;
    const double ua = u(static_cast<Eigen::Index>(e - 1)), ub = u(static_cast<Eigen::Index>(e));
    double s = 0.0;
    for (std::size_t q = 0; q < g.nodes.size(); ++q) {
      const double t = 0.5 * (1.0 + g.nodes[q]);
      const double d = exact(a + t * h) - (ua + t * (ub - ua));
      s += g.weights[q] * d * d;
    }
    sum += 0.5 * h * s;
    err.linf = std::max({err.linf, std::abs(exact(a) - ua), std::abs(exact(a + 0.5 * h) - 0.5 * (ua + ub))});
  }
  err.linf = std::max(err.linf, std::abs(exact(mesh.right()) - u(u.size() - 1)));
  err.l2 = std::sqrt(sum);
  return err;
}

double gradient_error(const Mesh1D& mesh, const Vector& u, const std::function<double(double)>& derivative) {
  const auto& g = gauss_legendre(7);
  double sum = 0.0;
  for (std::size_t e = 1; e <= mesh.num_elements(); ++e) {
    const double a = mesh.node(e - 1), h = mesh.h(e);
    const double slope = (u(static_cast<Eigen::Index>(e)) - u(static_cast<Eigen::Index>(e - 1))) / h;
    double s = 0.0;
    for (std::size_t q = 0; q < g.nodes.size(); ++q) {
      const double d = derivative(a + 0.5 * (1.0 + g.nodes[q]) * h) - slope;
      s += g.weights[q] * d * d;
    }
    sum += 0.5 * h * s;
  }
  return std::sqrt(sum);
}

double interpolate(const Mesh1D& mesh, const Vector& u, double x) {
  const auto nodes = mesh.nodes();
  if (x <= nodes.front()) return u(0);
  if (x >= nodes.back()) return u(u.size() - 1);
  const auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
  const auto k = static_cast<std::size_t>(it - nodes.begin());  // nodes[k-1] <= x < nodes[k]
  const double t = (x - nodes[k - 1]) / (nodes[k] - nodes[k - 1]);
  const auto i = static_cast<Eigen::Index>(k);
  return u(i - 1) + t * (u(i) - u(i - 1));
}

ErrorPair error_vs_reference(const Mesh1D& mesh, const Vector& u, const Mesh1D& ref_mesh, const Vector& ref_u) {
  if (mesh.left() != ref_mesh.left() || mesh.right() != ref_mesh.right()) {
    throw std::invalid_argument("error_vs_reference: meshes cover different intervals");
  }
  std::vector<double> xs;
  xs.reserve(mesh.num_nodes() + ref_mesh.num_nodes());
  std::merge(mesh.nodes().begin(), mesh.nodes().end(), ref_mesh.nodes().begin(), ref_mesh.nodes().end(),
             std::back_inserter(xs));
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  // Walk both meshes alongside the merged points.
  auto evaluator = [](const Mesh1D& m, const Vector& v) {
    return [&m, &v, k = std::size_t{1}](double x) mutable {
      while (k + 1 < m.num_nodes() && m.node(k) < x) ++k;
      const double t = (x - m.node(k - 1)) / m.h(k);
      const auto i = static_cast<Eigen::Index>(k);
      return v(i - 1) + t * (v(i) - v(i - 1));
    };
  };
  auto eval_u = evaluator(mesh, u);
  auto eval_r = evaluator(ref_mesh, ref_u);
  ErrorPair err;
  double sum = 0.0;
  double prev = eval_u(xs[0]) - eval_r(xs[0]);
  err.linf = std::abs(prev);
  for (std::size_t p = 1; p < xs.size(); ++p) {
    const double d = eval_u(xs[p]) - eval_r(xs[p]);
    sum += (xs[p] - xs[p - 1]) * (prev * prev + prev * d + d * d) / 3.0;
    err.linf = std::max(err.linf, std::abs(d));
    prev = d;
  }
  err.l2 = std::sqrt(sum);
  return err;
}

RateFit fit_rate(const std::vector<double>& n, const std::vector<double>& e) {
  if (n.size() != e.size() || n.size() < 3) throw std::invalid_argument("fit_rate: need at least 3 points");
  const double m = static_cast<double>(n.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double x = std::log(n[i]), y = std::log(e[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return RateFit{-slope, (sy - slope * sx) / m};
}

Mesh1D graded_mesh(double b, double c, std::size_t n, double q) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("graded_mesh: n must be even and >= 2");
  const double half = 0.5 * (c - b);
  const std::size_t m = n / 2;
  std::vector<double> x;
  x.reserve(n + 1);
  for (std::size_t i = 0; i <= m; ++i) x.push_back(b + half * std::pow(static_cast<double>(i) / m, q));
  for (std::size_t i = m; i-- > 0;) x.push_back(c - half * std::pow(static_cast<double>(i) / m, q));
  x[m] = b + half;
  x.back() = c;
  std::vector<double> clean{x.front()};
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (x[i] > clean.back()) {
      clean.push_back(x[i]);
    } else if (i + 1 == x.size()) {
      clean.back() = x[i];
    }
  }
  return Mesh1D(std::move(clean));
}

Reference compute_reference(const FracProblem& problem, std::size_t n, double q, const HMatrixOptions& hopts,
                            double tol) {
  Mesh1D fine = graded_mesh(problem.b, problem.c, n, q);
  const MgHierarchy hier(MeshHierarchy::by_coarsening(fine, 31), problem, hopts);
  const Vector F = assemble_rhs(fine, problem);
  const SolveResult sol = solve(hier, F, tol, 500);
  if (sol.status != SolveStatus::Converged) {
    throw std::runtime_error(std::string("compute_reference: multigrid ") + to_string(sol.status));
  }
  Reference ref{fine, with_boundary(fine, problem, sol.u), sol.iterations};
  return ref;
}

}  // namespace fracfem
