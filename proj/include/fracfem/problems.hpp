#pragma once

// Registry of the four benchmark problems on [0, 1].
//
//   example1: Riesz, smooth exact solution u = 10 x^2 (1-x)^2
//   example2: Riesz, f = -(1 + sin x), u(0) = u(1) = 0
//   example3: one-sided weights kappa1 = riesz_weight, kappa2 = ratio * kappa1,
//             -(kappa1 D_L + kappa2 D_R) u = 1 + sin x, u(0) = u(1) = 0
//   example4: Riesz with reaction, D u - lambda^2 u = -(1 + sin x),
//             u(0) = 0, u(1) = 1
//   custom:   user weights, lambda and boundary values, f = 1

#include <functional>
#include <string>

#include "fracfem/kernel.hpp"

namespace fracfem {

struct ProblemParams {
  std::string id = "example1";
  double alpha = 1.5;
  double kappa2_ratio = 0.0;  // example3
  double lambda = 0.5;        // example4
  // custom only
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double u_left = 0.0;
  double u_right = 0.0;
};

struct RegisteredProblem {
  std::string id;
  FracProblem problem;
  std::function<double(double)> exact;             // empty when unknown
  std::function<double(double)> exact_derivative;  // empty when unknown
  bool has_exact() const { return static_cast<bool>(exact); }
};

/// Throws std::invalid_argument for unknown ids.
RegisteredProblem make_problem(const ProblemParams& params);

double rhs_example1(double x, double alpha);
double exact_example1(double x);
double exact_example1_derivative(double x);

}  // namespace fracfem
