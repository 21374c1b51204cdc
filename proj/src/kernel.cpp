#include "fracfem/kernel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "fracfem/quadrature.hpp"

namespace fracfem {

double riesz_constant(double alpha) {
  if (!(alpha > 1.0 && alpha < 2.0)) throw std::invalid_argument("riesz_constant: alpha must lie in (1,2)");
  return std::cos(alpha * std::numbers::pi / 2.0) * std::tgamma(2.0 - alpha);
}

double riesz_weight(double alpha) {
  if (!(alpha > 1.0 && alpha < 2.0)) throw std::invalid_argument("riesz_weight: alpha must lie in (1,2)");
  return 1.0 / (2.0 * std::cos(alpha * std::numbers::pi / 2.0));
}

void FracProblem::validate() const {
  if (!(alpha > 1.0 && alpha < 2.0)) throw std::invalid_argument("FracProblem: alpha must lie in (1,2)");
  if (kappa1 == 0.0 && kappa2 == 0.0) throw std::invalid_argument("FracProblem: kappa1 and kappa2 both zero");
  if (kappa1 * kappa2 < 0.0) throw std::invalid_argument("FracProblem: kappa1 and kappa2 must share a sign");
  if (!std::isfinite(kappa1) || !std::isfinite(kappa2)) throw std::invalid_argument("FracProblem: non-finite weight");
  if (!(lambda >= 0.0)) throw std::invalid_argument("FracProblem: lambda must be >= 0");
  if (!(c > b)) throw std::invalid_argument("FracProblem: empty domain");
  if (!rhs) throw std::invalid_argument("FracProblem: missing right-hand side");
}

FracProblem FracProblem::riesz(double alpha, std::function<double(double)> f) {
  FracProblem p;
  p.alpha = alpha;
  p.kappa1 = p.kappa2 = riesz_weight(alpha);
  p.rhs = std::move(f);
  return p;
}

TaylorTerm taylor_factors(int nu, const TaylorFactorization& fac, double alpha) {
  if (fac.order < 2) throw std::invalid_argument("taylor_factors: order must be >= 2");
  if (nu < 0 || nu >= fac.order) throw std::out_of_range("taylor_factors: nu must lie in [0, order)");
  TaylorTerm t;
  t.p_degree = nu;
  for (int l = 1; l <= nu; ++l) t.coefficient *= (alpha + l - 2.0) / l;
  t.q_exponent = 1.0 - alpha - nu;
  return t;
}

Matrix far_field_factor_C(const Mesh1D& mesh, IndexRange rows, const TaylorFactorization& fac,
                          double length_scale) {
  if (fac.order < 2) throw std::invalid_argument("far_field_factor_C: order must be >= 2");
  if (rows.hi > mesh.num_interior() || rows.lo > rows.hi) throw std::out_of_range("far_field_factor_C: bad rows");
  const int k = fac.order;
  const double rho = length_scale;
  const double x0 = fac.center;
  Matrix C = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), k);
  std::vector<double> hab(k), habc(k);
  for (std::size_t d = rows.lo; d < rows.hi; ++d) {
    const std::size_t I = d + 1;
    const double a = (mesh.node(I - 1) - x0) / rho;
    const double b = (mesh.node(I) - x0) / rho;
    const double c = (mesh.node(I + 1) - x0) / rho;
    const double width = (mesh.node(I + 1) - mesh.node(I - 1)) / (rho * rho);
    // Complete homogeneous symmetric polynomials h_m(a,b) and h_m(a,b,c).
    double apow = 1.0;
    hab[0] = habc[0] = 1.0;
    for (int m = 1; m + 2 < k; ++m) {
      apow *= a;
      hab[m] = apow + b * hab[m - 1];
      habc[m] = hab[m] + c * habc[m - 1];
    }
    const auto r = static_cast<Eigen::Index>(d - rows.lo);
    for (int nu = 2; nu < k; ++nu) C(r, nu) = -width * habc[nu - 2];
  }
  return C;
}

namespace detail {

std::pair<double, double> weighted_power_integrals(double ua, double ub, double g) {
  const double len = ub - ua;
  if (ua >= 4.0 * len) {
    static const GaussRule& rule = gauss_legendre(12);
    const double mid = 0.5 * (ua + ub), half = 0.5 * len;
    double L = 0.0, R = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double t = rule.nodes[q];
      const double w = rule.weights[q] * std::pow(mid + half * t, g);
      L += w * 0.5 * (1.0 - t);
      R += w * 0.5 * (1.0 + t);
    }
    return {L * half, R * half};
  }
  // int_ua^ub u^m du, written to stay accurate for m + 1 near zero.
  const double lr = std::log1p(len / ua);
  auto power_integral = [&](double m) {
    const double e = m + 1.0;
    if (std::abs(e) < 1e-12) return lr;
    return std::pow(ua, e) * std::expm1(e * lr) / e;
  };
  const double Ig = power_integral(g);
  const double Ig1 = power_integral(g + 1.0);
  return {(ub * Ig - Ig1) / len, (Ig1 - ua * Ig) / len};
}

}  // namespace detail

Matrix far_field_factor_R(const Mesh1D& mesh, IndexRange cols, const TaylorFactorization& fac,
                          double alpha, double length_scale) {
  if (fac.order < 2) throw std::invalid_argument("far_field_factor_R: order must be >= 2");
  if (cols.hi > mesh.num_interior() || cols.lo > cols.hi) throw std::out_of_range("far_field_factor_R: bad cols");
  const int k = fac.order;
  const double rho = length_scale;
  const double x0 = fac.center;
  std::vector<double> coef(k);
  coef[0] = 1.0;
  for (int nu = 1; nu < k; ++nu) coef[nu] = coef[nu - 1] * (alpha + nu - 2.0) / nu;
  const double prefactor = std::pow(rho, 2.0 - alpha);

  Matrix R(static_cast<Eigen::Index>(cols.size()), k);
  for (std::size_t d = cols.lo; d < cols.hi; ++d) {
    const std::size_t J = d + 1;
    const double xl = mesh.node(J - 1), xm = mesh.node(J), xr = mesh.node(J + 1);
    bool right_of_center;
    if (x0 < xl) {
      right_of_center = true;
    } else if (x0 > xr) {
      right_of_center = false;
    } else {
      throw std::domain_error("far_field_factor_R: expansion center inside the support of unknown " +
                              std::to_string(d));
    }
    // Distances to the center in units of rho, ordered so that u1 < u2 < u3
    // and the hat peaks at u2.
    double u1, u2, u3;
    if (right_of_center) {
      u1 = (xl - x0) / rho;
      u2 = (xm - x0) / rho;
      u3 = (xr - x0) / rho;
    } else {
      u1 = (x0 - xr) / rho;
      u2 = (x0 - xm) / rho;
      u3 = (x0 - xl) / rho;
    }
    const auto r = static_cast<Eigen::Index>(d - cols.lo);
    for (int nu = 0; nu < k; ++nu) {
      const double g = 1.0 - alpha - nu;
      // Rising half on [u1, u2], falling half on [u2, u3].
      const double rising = detail::weighted_power_integrals(u1, u2, g).second;
      const double falling = detail::weighted_power_integrals(u2, u3, g).first;
      double v = coef[nu] * prefactor * (rising + falling);
      if (!right_of_center && (nu % 2 == 1)) v = -v;
      R(r, nu) = v;
    }
  }
  return R;
}

namespace {

constexpr std::array<int, 6> kSeparatedOrders{2, 3, 4, 7, 12, 24};

int separated_order_index(double ratio) {
  if (ratio >= 512.0) return 0;
  if (ratio >= 64.0) return 1;
  if (ratio >= 16.0) return 2;
  if (ratio >= 4.0) return 3;
  if (ratio >= 1.0) return 4;
  return 5;
}

}  // namespace

EntryEvaluator::EntryEvaluator(const Mesh1D& mesh, double alpha, double kappa1, double kappa2)
    : mesh_(&mesh),
      alpha_(alpha),
      kappa1_(kappa1),
      kappa2_(kappa2),
      inv_gamma_(1.0 / std::tgamma(2.0 - alpha)),
      f_scale_(1.0 / ((2.0 - alpha) * (3.0 - alpha))),
      hyper_scale_(-alpha * (alpha - 1.0)) {
  if (!(alpha > 1.0 && alpha < 2.0)) throw std::invalid_argument("EntryEvaluator: alpha must lie in (1,2)");
  for (std::size_t q = 0; q < kSeparatedOrders.size(); ++q) rules_[q] = &gauss_legendre(kSeparatedOrders[q]);
}

double EntryEvaluator::element_pair_integral(std::size_t e, std::size_t f) const {
  const auto& m = *mesh_;
  const double a = m.node(e - 1), b = m.node(e), c = m.node(f - 1), d = m.node(f);
  const double p = 3.0 - alpha_;
  auto phi = [&](double s) {
    if (s > 0.0) return kappa1_ * f_scale_ * std::pow(s, p);
    if (s < 0.0) return kappa2_ * f_scale_ * std::pow(-s, p);
    return 0.0;
  };
  return phi(b - c) - phi(b - d) - phi(a - c) + phi(a - d);
}

double EntryEvaluator::closed_form(std::size_t I, std::size_t J) const {
  const auto& m = *mesh_;
  const double p = 3.0 - alpha_;
  // Phi(x_r - xi_s) for row nodes I-1..I+1 and column nodes J-1..J+1.
  double phi[3][3];
  for (int r = 0; r < 3; ++r) {
    for (int s = 0; s < 3; ++s) {
      const double diff = m.node(I - 1 + r) - m.node(J - 1 + s);
      if (diff > 0.0) {
        phi[r][s] = kappa1_ * std::pow(diff, p);
      } else if (diff < 0.0) {
        phi[r][s] = kappa2_ * std::pow(-diff, p);
      } else {
        phi[r][s] = 0.0;
      }
    }
  }
  const double hr[2] = {m.h(I), m.h(I + 1)};
  const double hc[2] = {m.h(J), m.h(J + 1)};
  const double sr[2] = {1.0 / hr[0], -1.0 / hr[1]};
  const double sc[2] = {1.0 / hc[0], -1.0 / hc[1]};
  double sum = 0.0;
  for (int e = 0; e < 2; ++e) {
    for (int f = 0; f < 2; ++f) {
      // Element e spans row nodes (e, e+1), element f column nodes (f, f+1).
      const double rect = phi[e + 1][f] - phi[e + 1][f + 1] - phi[e][f] + phi[e][f + 1];
      sum += sr[e] * sc[f] * rect;
    }
  }
  return sum * f_scale_;
}

double EntryEvaluator::separated_form(std::size_t I, std::size_t J) const {
  const auto& m = *mesh_;
  const bool row_left = m.node(I + 1) <= m.node(J - 1);
  const double weight = row_left ? kappa2_ : kappa1_;
  if (weight == 0.0) return 0.0;
  const double expo = -1.0 - alpha_;
  double sum = 0.0;
  for (int e = 0; e < 2; ++e) {
    const double xa = m.node(I - 1 + e), xb = m.node(I + e);
    const double xmid = 0.5 * (xa + xb), xhalf = 0.5 * (xb - xa);
    for (int f = 0; f < 2; ++f) {
      const double ya = m.node(J - 1 + f), yb = m.node(J + f);
      const double ymid = 0.5 * (ya + yb), yhalf = 0.5 * (yb - ya);
      const double gap = row_left ? ya - xb : xa - yb;
      const auto& rx = *rules_[separated_order_index(gap / (xb - xa))];
      const auto& ry = *rules_[separated_order_index(gap / (yb - ya))];
      const double center = row_left ? ymid - xmid : xmid - ymid;
      double pair = 0.0;
      for (std::size_t qx = 0; qx < rx.nodes.size(); ++qx) {
        const double tx = rx.nodes[qx];
        // Hat value: rising on the first element, falling on the second.
        const double px = e == 0 ? 0.5 * (1.0 + tx) : 0.5 * (1.0 - tx);
        const double sx = row_left ? -xhalf * tx : xhalf * tx;
        double inner = 0.0;
        for (std::size_t qy = 0; qy < ry.nodes.size(); ++qy) {
          const double ty = ry.nodes[qy];
          const double py = f == 0 ? 0.5 * (1.0 + ty) : 0.5 * (1.0 - ty);
          const double dist = center + sx + (row_left ? yhalf * ty : -yhalf * ty);
          inner += ry.weights[qy] * py * std::pow(dist, expo);
        }
        pair += rx.weights[qx] * px * inner;
      }
      sum += pair * xhalf * yhalf;
    }
  }
  return weight * hyper_scale_ * sum;
}

double EntryEvaluator::operator()(std::size_t i, std::size_t j) const {
  const auto& m = *mesh_;
  const std::size_t I = i + 1, J = j + 1;
  const double gap = std::max(m.node(J - 1) - m.node(I + 1), m.node(I - 1) - m.node(J + 1));
  if (gap > 0.0) {
    const double hmax = std::max({m.h(I), m.h(I + 1), m.h(J), m.h(J + 1)});
    if (gap >= 0.25 * hmax) return separated_form(I, J) * inv_gamma_;
  }
  return closed_form(I, J) * inv_gamma_;
}

double near_field_entry(const Mesh1D& mesh, std::size_t i, std::size_t j, double alpha, double kappa1,
                        double kappa2) {
  if (i >= mesh.num_interior() || j >= mesh.num_interior()) throw std::out_of_range("near_field_entry: index");
  return EntryEvaluator(mesh, alpha, kappa1, kappa2)(i, j);
}

SparseMatrix mass_matrix(const Mesh1D& mesh) {
  const std::size_t n = mesh.num_interior();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(3 * n);
  for (std::size_t d = 0; d < n; ++d) {
    const std::size_t I = d + 1;
    t.emplace_back(d, d, (mesh.h(I) + mesh.h(I + 1)) / 3.0);
    if (d + 1 < n) {
      t.emplace_back(d, d + 1, mesh.h(I + 1) / 6.0);
      t.emplace_back(d + 1, d, mesh.h(I + 1) / 6.0);
    }
  }
  SparseMatrix M(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

namespace {

void add_reaction(Matrix& A, const Mesh1D& mesh, double lambda) {
  if (lambda == 0.0) return;
  const double l2 = lambda * lambda;
  const std::size_t n = mesh.num_interior();
  for (std::size_t d = 0; d < n; ++d) {
    const std::size_t I = d + 1;
    const auto e = static_cast<Eigen::Index>(d);
    A(e, e) -= l2 * (mesh.h(I) + mesh.h(I + 1)) / 3.0;
    if (d + 1 < n) {
      A(e, e + 1) -= l2 * mesh.h(I + 1) / 6.0;
      A(e + 1, e) -= l2 * mesh.h(I + 1) / 6.0;
    }
  }
}

}  // namespace

Matrix assemble_dense(const Mesh1D& mesh, const FracProblem& problem) {
  problem.validate();
  const EntryEvaluator eval(mesh, problem.alpha, problem.kappa1, problem.kappa2);
  const auto n = static_cast<Eigen::Index>(mesh.num_interior());
  Matrix A(n, n);
  const bool sym = problem.symmetric();
#pragma omp parallel for schedule(dynamic, 16)
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = sym ? i : 0; j < n; ++j) {
      A(i, j) = eval(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
  }
  if (sym) {
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = j + 1; i < n; ++i) A(i, j) = A(j, i);
    }
  }
  add_reaction(A, mesh, problem.lambda);
  return A;
}

Matrix assemble_dense_reference(const Mesh1D& mesh, const FracProblem& problem) {
  problem.validate();
  const auto n = static_cast<Eigen::Index>(mesh.num_interior());
  Matrix A(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      A(i, j) = near_field_entry(mesh, static_cast<std::size_t>(i), static_cast<std::size_t>(j),
                                 problem.alpha, problem.kappa1, problem.kappa2);
    }
  }
  add_reaction(A, mesh, problem.lambda);
  return A;
}

Vector load_vector(const Mesh1D& mesh, const FracProblem& problem) {
  if (!problem.rhs) throw std::invalid_argument("load_vector: missing right-hand side");
  const std::size_t n = mesh.num_interior();
  Vector F = Vector::Zero(static_cast<Eigen::Index>(n));
  const auto& f = problem.rhs;
  for (std::size_t e = 1; e <= mesh.num_elements(); ++e) {
    const double a = mesh.node(e - 1), b = mesh.node(e), h = b - a;
    double rising, falling;  // int f (x-a)/h and int f (b-x)/h over the element
    if (problem.singular_rhs) {
      // The absolute floor stops refinement at rounding level where f
      // changes sign inside the element.
      const double scale = std::max({std::abs(f(a + 0.25 * h)), std::abs(f(a + 0.5 * h)), std::abs(f(b - 0.25 * h))});
      const double floor = 1e-14 * h * scale;
      rising = integrate_adaptive([&](double x) { return f(x) * (x - a) / h; }, a, b, 5, 1e-13, floor, 30);
      falling = integrate_adaptive([&](double x) { return f(x) * (b - x) / h; }, a, b, 5, 1e-13, floor, 30);
    } else {
      const auto& g = gauss_legendre(5);
      rising = falling = 0.0;
      for (int q = 0; q < 5; ++q) {
        const double t = g.nodes[q];
        const double fx = f(0.5 * (a + b) + 0.5 * h * t);
        rising += g.weights[q] * fx * 0.5 * (1.0 + t);
        falling += g.weights[q] * fx * 0.5 * (1.0 - t);
      }
      rising *= 0.5 * h;
      falling *= 0.5 * h;
    }
    // On element e the hat of node e-1 (unknown e-2) falls and the hat of node e (unknown e-1) rises.
    if (e >= 2) F(static_cast<Eigen::Index>(e - 2)) += falling;
    if (e <= n) F(static_cast<Eigen::Index>(e - 1)) += rising;
  }
  return F;
}

double lifting_value(const FracProblem& problem, double x) {
  return problem.u_left + (problem.u_right - problem.u_left) * (x - problem.b) / (problem.c - problem.b);
}

Vector lifting_rhs(const Mesh1D& mesh, const FracProblem& problem) {
  const std::size_t n = mesh.num_interior();
  Vector L = Vector::Zero(static_cast<Eigen::Index>(n));
  if (problem.u_left == 0.0 && problem.u_right == 0.0) return L;
  const double slope = (problem.u_right - problem.u_left) / (problem.c - problem.b);
  const double alpha = problem.alpha;
  const double p = 3.0 - alpha;
  const double scale = 1.0 / ((2.0 - alpha) * (3.0 - alpha) * std::tgamma(2.0 - alpha));
  auto phi = [&](double s) {
    if (s > 0.0) return problem.kappa1 * std::pow(s, p);
    if (s < 0.0) return problem.kappa2 * std::pow(-s, p);
    return 0.0;
  };
  // int_e int_b^c K(x, xi) dxi dx for element e = [xa, xb].
  auto strip = [&](double xa, double xb) {
    return phi(xb - problem.b) - phi(xb - problem.c) - phi(xa - problem.b) + phi(xa - problem.c);
  };
  const double l2 = problem.lambda * problem.lambda;
  for (std::size_t d = 0; d < n; ++d) {
    const std::size_t I = d + 1;
    const double xl = mesh.node(I - 1), xm = mesh.node(I), xr = mesh.node(I + 1);
    const double a_part = slope * scale * (strip(xl, xm) / mesh.h(I) - strip(xm, xr) / mesh.h(I + 1));
    const double ul = lifting_value(problem, xl), um = lifting_value(problem, xm), ur = lifting_value(problem, xr);
    const double m_part = mesh.h(I) * (ul + 2.0 * um) / 6.0 + mesh.h(I + 1) * (2.0 * um + ur) / 6.0;
    L(static_cast<Eigen::Index>(d)) = a_part - l2 * m_part;
  }
  return L;
}

Vector assemble_rhs(const Mesh1D& mesh, const FracProblem& problem) {
  return load_vector(mesh, problem) - lifting_rhs(mesh, problem);
}

Vector with_boundary(const Mesh1D& mesh, const FracProblem& problem, const Vector& w) {
  const std::size_t n = mesh.num_interior();
  if (static_cast<std::size_t>(w.size()) != n) throw std::invalid_argument("with_boundary: size mismatch");
  Vector u(static_cast<Eigen::Index>(n + 2));
  u(0) = problem.u_left;
  u(static_cast<Eigen::Index>(n + 1)) = problem.u_right;
  for (std::size_t d = 0; d < n; ++d) {
    u(static_cast<Eigen::Index>(d + 1)) = lifting_value(problem, mesh.node(d + 1)) + w(static_cast<Eigen::Index>(d));
  }
  return u;
}

}  // namespace fracfem
