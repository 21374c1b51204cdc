#pragma once

// Fractional kernel, Taylor factorization of its smooth far field, exact
// Galerkin entries, load vector, mass matrix and boundary lifting.
//
// Problem class (1 < alpha < 2, u(b) = u_left, u(c) = u_right):
//
//     -(kappa1 D_L^alpha + kappa2 D_R^alpha) u - lambda^2 u = f   on (b, c)
//
// with D_L, D_R the left and right Riemann-Liouville derivatives. The Riesz
// derivative corresponds to kappa1 = kappa2 = riesz_weight(alpha); both
// weights are then negative, and the stiffness matrix is negative definite.
// The Caputo derivative is not supported.
//
// After moving one derivative onto each basis function,
//
//     A_ij = 1/Gamma(2-alpha) * int int K(x, xi) phi_i'(x) phi_j'(xi) dxi dx,
//     K(x, xi) = kappa1 (x - xi)_+^{1-alpha} + kappa2 (xi - x)_+^{1-alpha},
//
// and the discrete system is (A - lambda^2 M) w = F - a(u0, .) + lambda^2 (u0, .)
// where u0 is the linear interpolant of the boundary values.

#include <array>
#include <functional>
#include <utility>

#include <Eigen/Dense>

#include "fracfem/mesh.hpp"
#include "fracfem/quadrature.hpp"

namespace fracfem {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// cos(alpha pi / 2) Gamma(2 - alpha); negative on (1, 2).
double riesz_constant(double alpha);

/// 1 / (2 cos(alpha pi / 2)), the kernel weight of each one-sided derivative
/// in the Riesz derivative.
double riesz_weight(double alpha);

struct FracProblem {
  double alpha = 1.5;
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double lambda = 0.0;
  std::function<double(double)> rhs;
  double u_left = 0.0;
  double u_right = 0.0;
  double b = 0.0;
  double c = 1.0;
  /// Set when f has non-smooth end-point behaviour; the load vector then
  /// integrates adaptively instead of with the fixed 5-point rule.
  bool singular_rhs = false;

  /// Throws std::invalid_argument on alpha outside (1,2), weights of
  /// opposite sign or both zero, lambda < 0, c <= b or a missing rhs.
  void validate() const;
  bool symmetric() const { return kappa1 == kappa2; }

  static FracProblem riesz(double alpha, std::function<double(double)> f);
};

/// Truncated Taylor expansion of the kernel around a center x0 in the row
/// cluster: k terms, nu = 0 .. k-1.
struct TaylorFactorization {
  int order = 10;
  double center = 0.0;
};

/// nu-th term: p_nu(x) = (x - x0)^nu and
/// q_nu(xi) = coefficient * |xi - x0|^{exponent} (times (-1)^nu when xi < x0).
struct TaylorTerm {
  int p_degree = 0;
  double coefficient = 1.0;  // prod_{l=1}^{nu} (alpha + l - 2) / nu!
  double q_exponent = 0.0;   // 1 - alpha - nu
};

TaylorTerm taylor_factors(int nu, const TaylorFactorization& fac, double alpha);

/// C_{i nu} = int p_nu'(x) phi_i'(x) dx for the unknowns in `rows`, nu < k.
/// With length_scale rho != 1, column nu is divided by rho^nu.
Matrix far_field_factor_C(const Mesh1D& mesh, IndexRange rows, const TaylorFactorization& fac,
                          double length_scale = 1.0);

/// R_{j nu} = int q_nu(xi) phi_j(xi) dxi for the unknowns in `cols`.
/// With length_scale rho != 1, column nu is multiplied by rho^nu.
/// Throws std::domain_error if the center lies inside a basis support.
Matrix far_field_factor_R(const Mesh1D& mesh, IndexRange cols, const TaylorFactorization& fac,
                          double alpha, double length_scale = 1.0);

namespace detail {
/// For 0 < ua < ub returns L = int u^g (ub - u)/(ub - ua) du and
/// R = int u^g (u - ua)/(ub - ua) du over [ua, ub]; g = -1 and g = -2 take
/// the logarithmic branch.
std::pair<double, double> weighted_power_integrals(double ua, double ub, double g);
}  // namespace detail

/// Evaluates exact Galerkin entries of the fractional part of the stiffness
/// matrix. Holds precomputed constants; cheap to copy, safe to share.
class EntryEvaluator {
 public:
  EntryEvaluator(const Mesh1D& mesh, double alpha, double kappa1, double kappa2);

  /// A_ij for 0-based unknowns i (test) and j (trial).
  double operator()(std::size_t i, std::size_t j) const;

  /// A_ij Gamma(2-alpha) restricted to element pair (e, f) with unit slopes,
  /// i.e. int_e int_f K(x, xi) dxi dx. Elements are 1-based.
  double element_pair_integral(std::size_t e, std::size_t f) const;

 private:
  double closed_form(std::size_t I, std::size_t J) const;
  double separated_form(std::size_t I, std::size_t J) const;

  const Mesh1D* mesh_;
  double alpha_, kappa1_, kappa2_;
  double inv_gamma_;    // 1 / Gamma(2 - alpha)
  double f_scale_;      // 1 / ((2 - alpha)(3 - alpha))
  double hyper_scale_;  // -alpha (alpha - 1)
  std::array<const GaussRule*, 6> rules_{};
};

double near_field_entry(const Mesh1D& mesh, std::size_t i, std::size_t j, double alpha,
                        double kappa1, double kappa2);

/// Dense A - lambda^2 M. OpenMP-parallel over rows.
Matrix assemble_dense(const Mesh1D& mesh, const FracProblem& problem);
/// Same matrix, single thread, one entry at a time; kept as a reference.
Matrix assemble_dense_reference(const Mesh1D& mesh, const FracProblem& problem);

/// Tridiagonal mass matrix of the interior hat functions.
SparseMatrix mass_matrix(const Mesh1D& mesh);

/// f_i = int f phi_i.
Vector load_vector(const Mesh1D& mesh, const FracProblem& problem);

/// a(u0, phi_i) - lambda^2 (u0, phi_i) for the linear interpolant u0 of the
/// boundary values.
Vector lifting_rhs(const Mesh1D& mesh, const FracProblem& problem);

/// load_vector - lifting_rhs.
Vector assemble_rhs(const Mesh1D& mesh, const FracProblem& problem);

/// Linear interpolant of the boundary data.
double lifting_value(const FracProblem& problem, double x);

/// Nodal values at all mesh nodes (boundary included) of u0 + w, where w
/// holds the interior unknowns.
Vector with_boundary(const Mesh1D& mesh, const FracProblem& problem, const Vector& w);

}  // namespace fracfem
