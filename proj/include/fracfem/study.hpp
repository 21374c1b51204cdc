#pragma once

// Study runners behind the CLI: uniform and adaptive convergence, far-field
// decay, multigrid iteration grid and cost scaling. Each returns plain rows;
// writers turn them into CSV.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "fracfem/afem.hpp"
#include "fracfem/norms.hpp"
#include "fracfem/problems.hpp"

namespace fracfem {

struct StudySpec {
  ProblemParams params;
  std::vector<std::size_t> elements{32, 64, 128, 256, 512, 1024, 2048, 4096};
  HMatrixOptions hopts;
  double tol = 1e-10;
  int max_mg_iterations = 200;
  bool dense_path = true;
  bool hmatrix_path = true;
  // adaptive loop
  std::size_t afem_initial_elements = 32;
  AfemConfig afem;
  // Adaptive rates are fitted on rows with N >= afem_fit_from * N_0, which
  // skips the first sweeps that only resolve the end points.
  double afem_fit_from = 4.0;
  // reference solution for problems without a closed form
  std::size_t ref_elements = 1u << 15;
  double ref_grading = 3.0;
  int ref_rank = 24;
  std::uint64_t seed = 42;

  /// Throws std::invalid_argument on unsorted or too small mesh sizes and on
  /// the FracProblem / AfemConfig range checks.
  void validate() const;
};

struct ConvergenceRow {
  std::size_t N = 0;  // unknowns
  double error_l2 = 0.0;
  double error_linf = 0.0;
  double eta = 0.0;
  int mg_iters = 0;
  double t_assemble = 0.0, t_solve = 0.0, t_estimate = 0.0, t_mark = 0.0, t_refine = 0.0;
  std::size_t total_dofs = 0;  // adaptive: running sum of N
  std::string status = "converged";
};

struct ConvergenceReport {
  std::string path;  // "dense", "hmatrix" or "afem"
  std::vector<ConvergenceRow> rows;
  RateFit l2, linf;
  bool fitted = false;
};

/// Error of nodal values against the exact solution when registered, else
/// against a fine graded-mesh reference computed once here.
class ErrorOracle {
 public:
  ErrorOracle(const RegisteredProblem& problem, const StudySpec& spec);
  ErrorPair operator()(const Mesh1D& mesh, const Vector& u) const;
  bool exact() const { return problem_.has_exact(); }
  const Reference* reference() const { return ref_.get(); }

 private:
  RegisteredProblem problem_;
  std::shared_ptr<const Reference> ref_;
};

/// Least-squares rates over the rows with N >= min_n (all rows when fewer
/// than three qualify).
void fit_report(ConvergenceReport& report, std::size_t min_n = 0);

struct UniformStudy {
  ConvergenceReport dense, hmatrix;
};

/// Both solution paths on uniform meshes with spec.elements elements.
UniformStudy run_uniform_study(const StudySpec& spec, const ErrorOracle& err);

/// Adaptive loop from a uniform mesh of spec.afem_initial_elements.
ConvergenceReport run_afem_study(const StudySpec& spec, const ErrorOracle& err, AfemResult* out = nullptr);

struct DecayRow {
  double alpha = 0.0;
  double ratio = 0.0;
  int k = 0;
  double error = 0.0;      // ||B - B_k||_F
  double rel_error = 0.0;  // ||B - B_k||_F / ||B||_F
};

/// Far-field approximation error of one fixed block on a uniform mesh with
/// N = 511 unknowns: rows are unknowns [0, 32), columns 32 unknowns starting
/// at 33 (1 + ratio), so dist / diam of the row cluster equals ratio.
std::vector<DecayRow> run_hmat_decay(const std::vector<double>& alphas, const std::vector<double>& ratios,
                                     const std::vector<int>& ks);

/// Block error for a single configuration.
DecayRow decay_point(double alpha, double ratio, int k);

struct MgCell {
  double alpha = 0.0;
  std::size_t elements = 0;
  int iterations = 0;
  std::string status;
  double seconds = 0.0;
};

/// V-cycle iteration counts on uniform meshes, one cell per (alpha, size).
std::vector<MgCell> run_mg_table(const StudySpec& spec, const std::vector<double>& alphas,
                                 const std::vector<std::size_t>& elements);

struct CostRow {
  std::string method;  // "dense_lu" or "hmatrix_mg"
  std::size_t N = 0;
  double t_assemble = 0.0;
  double t_solve = 0.0;
  double t_total = 0.0;
  std::size_t storage = 0;  // stored scalars
  int iterations = 0;
};

struct CostScaling {
  std::vector<CostRow> rows;
  double dense_exponent = 0.0;     // fitted on t_total
  double dense_lu_exponent = 0.0;  // fitted on t_solve, the factorization alone
  double hmatrix_exponent = 0.0;
};

/// End-to-end time (assembly plus solve) against N for both paths.
CostScaling run_cost_scaling(const StudySpec& spec, const std::vector<std::size_t>& dense_elements,
                             const std::vector<std::size_t>& hmatrix_elements);

/// N,error_l2,error_linf,eta,mg_iters,t_assemble,t_solve,t_estimate,t_mark,t_refine
void write_convergence_csv(std::ostream& out, const ConvergenceReport& report);
void write_decay_csv(std::ostream& out, const std::vector<DecayRow>& rows);
void write_mg_csv(std::ostream& out, const std::vector<MgCell>& cells);
void write_cost_csv(std::ostream& out, const CostScaling& cost);

}  // namespace fracfem
