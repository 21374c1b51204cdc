#include "fracfem/afem.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace fracfem {

ElementEstimates estimate(const Mesh1D& mesh, const Vector& u) {
  const std::size_t ne = mesh.num_elements();
  if (static_cast<std::size_t>(u.size()) != mesh.num_nodes()) throw std::invalid_argument("estimate: size mismatch");
  std::vector<double> slope(ne + 1);
  for (std::size_t e = 1; e <= ne; ++e) slope[e] = (u(static_cast<Eigen::Index>(e)) - u(static_cast<Eigen::Index>(e - 1))) / mesh.h(e);
  std::vector<double> g(ne + 1);  // recovered gradient at nodes 0..ne
  g[0] = slope[1];
  g[ne] = slope[ne];
  for (std::size_t i = 1; i < ne; ++i) {
    g[i] = (mesh.h(i) * slope[i] + mesh.h(i + 1) * slope[i + 1]) / (mesh.h(i) + mesh.h(i + 1));
  }
  ElementEstimates est;
  est.eta.resize(ne);
  double sum = 0.0;
  for (std::size_t e = 1; e <= ne; ++e) {
    const double d0 = slope[e] - g[e - 1];
    const double d1 = slope[e] - g[e];
    const double sq = mesh.h(e) * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0;
    est.eta[e - 1] = std::sqrt(sq);
    sum += sq;
  }
  est.total = std::sqrt(sum);
  return est;
}

std::vector<std::size_t> mark(const ElementEstimates& est, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("mark: theta must lie in (0,1]");
  const std::size_t n = est.eta.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return est.eta[a] > est.eta[b]; });
  std::vector<std::size_t> marked;
  double total = 0.0;
  for (std::size_t k : order) total += est.eta[k] * est.eta[k];
  if (total == 0.0) return marked;
  if (theta == 1.0) {
    for (std::size_t k : order) {
      if (est.eta[k] > 0.0) marked.push_back(k + 1);
    }
  } else {
    // A relative slack absorbs rounding in the prefix sums.
    const double target = theta * theta * total * (1.0 - 1e-12);
    double acc = 0.0;
    for (std::size_t k : order) {
      if (acc >= target) break;
      acc += est.eta[k] * est.eta[k];
      marked.push_back(k + 1);
    }
  }
  std::sort(marked.begin(), marked.end());
  return marked;
}

void AfemConfig::validate() const {
  if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("AfemConfig: theta must lie in (0,1]");
  if (!(epsilon > 0.0)) throw std::invalid_argument("AfemConfig: epsilon must be positive");
  if (max_iterations < 1) throw std::invalid_argument("AfemConfig: max_iterations must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("AfemConfig: tol must be positive");
  if (!(min_h >= 0.0)) throw std::invalid_argument("AfemConfig: min_h must be >= 0");
  if (grading != 0.0 && !(grading >= 1.0)) throw std::invalid_argument("AfemConfig: grading must be 0 or >= 1");
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

AfemResult afem_loop(const Mesh1D& initial, const FracProblem& problem, const AfemConfig& config,
                     const ErrorFunction& error) {
  config.validate();
  problem.validate();
  AfemResult result;
  result.meshes.push_back(initial);
  std::optional<MgHierarchy> hier;

  for (int it = 0;; ++it) {
    const Mesh1D& mesh = result.meshes.back();
    AfemStep step;
    step.iteration = it;
    step.dofs = mesh.num_interior();

    auto t0 = Clock::now();
    if (!hier) {
      hier.emplace(MeshHierarchy(mesh), problem, config.hopts, config.coarse_cap);
    } else {
      hier->add_level(mesh);
    }
    const Vector F = assemble_rhs(mesh, problem);
    step.t_assemble = seconds_since(t0);

    t0 = Clock::now();
    SolveOptions sopts;
    sopts.method = config.method;
    sopts.log = config.mg_log;
    const SolveResult sol = solve(*hier, F, config.tol, config.max_mg_iterations, sopts);
    step.t_solve = seconds_since(t0);
    step.mg_iterations = sol.iterations;
    step.status = sol.status;
    result.u = with_boundary(mesh, problem, sol.u);

    t0 = Clock::now();
    const ElementEstimates est = estimate(mesh, result.u);
    step.t_estimate = seconds_since(t0);
    step.eta = est.total;
    if (error) std::tie(step.error_l2, step.error_linf) = error(mesh, result.u);

    auto finish = [&](const char* reason) {
      result.history.push_back(step);
      result.stop_reason = reason;
      return result;
    };
    if (sol.status != SolveStatus::Converged) return finish("solver");
    if (est.total <= config.epsilon) return finish("epsilon");
    if (it + 1 >= config.max_iterations) return finish("max_iterations");

    t0 = Clock::now();
    // Elements whose halves would fall below the resolution floor are frozen:
    // they keep their indicator in eta but take no part in marking.
    ElementEstimates marking = est;
    const double floor = config.min_h * (mesh.right() - mesh.left());
    for (std::size_t e = 1; e <= mesh.num_elements(); ++e) {
      if (0.5 * mesh.h(e) < floor) marking.eta[e - 1] = 0.0;
    }
    auto marked = mark(marking, config.theta);
    if (config.grading > 0.0 && !marked.empty()) marked = grading_closure(mesh, marked, config.grading);
    step.t_mark = seconds_since(t0);
    step.marked = marked.size();
    if (marked.empty()) return finish("no_marked");
    if (config.max_dofs > 0 && mesh.num_interior() + marked.size() > config.max_dofs) return finish("max_dofs");

    t0 = Clock::now();
    Mesh1D refined = bisect(mesh, marked);
    step.t_refine = seconds_since(t0);
    result.history.push_back(step);
    result.meshes.push_back(std::move(refined));
  }
}

}  // namespace fracfem
