#pragma once

// Gauss-Legendre rules on [-1, 1] and a small adaptive driver built on them.

#include <functional>
#include <vector>

namespace fracfem {

struct GaussRule {
  std::vector<double> nodes;    // ascending, in (-1, 1)
  std::vector<double> weights;  // sum to 2
};

/// n-point Gauss-Legendre rule, computed once per n and cached (thread-safe).
const GaussRule& gauss_legendre(int n);

/// Integral of f over [a, b] with the n-point rule.
double integrate_gauss(const std::function<double(double)>& f, double a, double b, int n);

/// Adaptive bisection: accepts the two-halves estimate when it agrees with
/// the whole-interval estimate to |diff| <= max(abs_tol, rel_tol * |I|).
/// Both estimates use the n-point rule; recursion stops at max_depth.
/// abs_tol is a per-subinterval floor and is not split among the halves, so
/// rounding noise in f cannot force refinement down to max_depth.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b, int n = 5,
                          double rel_tol = 1e-14, double abs_tol = 0.0, int max_depth = 40);

}  // namespace fracfem
