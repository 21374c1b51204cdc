#pragma once

// Error norms, convergence-rate fitting and fine-grid reference solutions.

#include <functional>
#include <vector>

#include "fracfem/hmatrix.hpp"

namespace fracfem {

struct ErrorPair {
  double l2 = 0.0;
  double linf = 0.0;
};

/// u holds nodal values at every node. L2 by 7-point Gauss per element,
/// Linf sampled at nodes and element midpoints.
ErrorPair error_vs_exact(const Mesh1D& mesh, const Vector& u, const std::function<double(double)>& exact);

/// ||u' - u_h'||_{L2}, 7-point Gauss per element.
double gradient_error(const Mesh1D& mesh, const Vector& u, const std::function<double(double)>& derivative);

/// Error of a piecewise-linear function against a piecewise-linear reference
/// on another mesh of the same interval. Both are evaluated on the union of
/// the node sets, where their difference is linear per cell, so both norms
/// are exact for the pair.
ErrorPair error_vs_reference(const Mesh1D& mesh, const Vector& u, const Mesh1D& ref_mesh, const Vector& ref_u);

/// Value at x of the piecewise-linear function with nodal values u.
double interpolate(const Mesh1D& mesh, const Vector& u, double x);

struct RateFit {
  double rate = 0.0;       // r in E = C N^{-r}
  double log_c = 0.0;
};

/// Least squares on (log N, log E); needs at least 3 points.
RateFit fit_rate(const std::vector<double>& n, const std::vector<double>& e);

/// Mesh on [b, c] with n elements graded toward both ends: the left half
/// follows b + (c-b)/2 (2i/n)^q, the right half mirrors it. Nodes that round
/// onto their neighbour are dropped.
Mesh1D graded_mesh(double b, double c, std::size_t n, double q);

struct Reference {
  Mesh1D mesh;
  Vector u;  // nodal values, boundary included
  int mg_iterations = 0;
};

/// Solves on graded_mesh(n, q) with multigrid over a coarsened hierarchy.
Reference compute_reference(const FracProblem& problem, std::size_t n, double q, const HMatrixOptions& hopts,
                            double tol = 1e-10);

}  // namespace fracfem
