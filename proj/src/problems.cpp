#include "fracfem/problems.hpp"

#include <cmath>
#include <stdexcept>

namespace fracfem {

double rhs_example1(double x, double alpha) {
  const double y = 1.0 - x;
  auto pair = [&](double p) { return std::pow(x, p) + std::pow(y, p); };
  const double bracket = 2.0 / std::tgamma(3.0 - alpha) * pair(2.0 - alpha) -
                         12.0 / std::tgamma(4.0 - alpha) * pair(3.0 - alpha) +
                         24.0 / std::tgamma(5.0 - alpha) * pair(4.0 - alpha);
  return -10.0 * riesz_weight(alpha) * bracket;
}

double exact_example1(double x) {
  const double y = x * (1.0 - x);
  return 10.0 * y * y;
}

double exact_example1_derivative(double x) { return 20.0 * x * (1.0 - x) * (1.0 - 2.0 * x); }

RegisteredProblem make_problem(const ProblemParams& params) {
  const double a = params.alpha;
  RegisteredProblem r;
  r.id = params.id;
  auto& p = r.problem;
  p.alpha = a;
  if (params.id == "example1") {
    p.kappa1 = p.kappa2 = riesz_weight(a);
    p.rhs = [a](double x) { return rhs_example1(x, a); };
    p.singular_rhs = true;
    r.exact = exact_example1;
    r.exact_derivative = exact_example1_derivative;
  } else if (params.id == "example2") {
    p.kappa1 = p.kappa2 = riesz_weight(a);
    p.rhs = [](double x) { return -(1.0 + std::sin(x)); };
  } else if (params.id == "example3") {
    p.kappa1 = riesz_weight(a);
    p.kappa2 = params.kappa2_ratio * p.kappa1;
    p.rhs = [](double x) { return 1.0 + std::sin(x); };
  } else if (params.id == "example4") {
    p.kappa1 = p.kappa2 = riesz_weight(a);
    p.lambda = params.lambda;
    p.u_left = 0.0;
    p.u_right = 1.0;
    p.rhs = [](double x) { return -(1.0 + std::sin(x)); };
  } else if (params.id == "custom") {
    p.kappa1 = params.kappa1;
    p.kappa2 = params.kappa2;
    p.lambda = params.lambda;
    p.u_left = params.u_left;
    p.u_right = params.u_right;
    p.rhs = [](double) { return 1.0; };
  } else {
    throw std::invalid_argument("unknown problem id '" + params.id + "'");
  }
  p.validate();
  return r;
}

}  // namespace fracfem
