#include "fracfem/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace fracfem {

namespace {

GaussRule compute_rule(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Newton on P_n starting from the Chebyshev-like guess.
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Re-evaluate the derivative at the converged root for the weight.
    double p0 = 1.0, p1 = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  if (n < 1 || n > 512) throw std::invalid_argument("gauss_legendre: order out of range");
  static std::mutex mtx;
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussRule>(compute_rule(n));
  return *slot;
}

double integrate_gauss(const std::function<double(double)>& f, double a, double b, int n) {
  const auto& g = gauss_legendre(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double s = 0.0;
  for (int q = 0; q < n; ++q) s += g.weights[q] * f(mid + half * g.nodes[q]);
  return s * half;
}

namespace {

double adaptive_step(const std::function<double(double)>& f, double a, double b, double whole,
                     int n, double rel_tol, double abs_tol, int depth) {
  const double m = 0.5 * (a + b);
  const double left = integrate_gauss(f, a, m, n);
  const double right = integrate_gauss(f, m, b, n);
  const double halves = left + right;
  if (depth <= 0 || std::abs(halves - whole) <= std::max(abs_tol, rel_tol * std::abs(halves))) {
    return halves;
  }
  return adaptive_step(f, a, m, left, n, rel_tol, abs_tol, depth - 1) +
         adaptive_step(f, m, b, right, n, rel_tol, abs_tol, depth - 1);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, int n,
                          double rel_tol, double abs_tol, int max_depth) {
  return adaptive_step(f, a, b, integrate_gauss(f, a, b, n), n, rel_tol, abs_tol, max_depth);
}

}  // namespace fracfem
