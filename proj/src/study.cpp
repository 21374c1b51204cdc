#include "fracfem/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <Eigen/LU>

namespace fracfem {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max_iterations";
    case SolveStatus::Breakdown: return "breakdown";
  }
  return "unknown";
}

}  // namespace

void StudySpec::validate() const {
  make_problem(params).problem.validate();
  if (elements.empty()) throw std::invalid_argument("StudySpec: no mesh sizes");
  for (std::size_t i = 0; i < elements.size(); ++i) {
    if (elements[i] < 2) throw std::invalid_argument("StudySpec: mesh sizes must be >= 2 elements");
    if (i > 0 && elements[i] <= elements[i - 1]) {
      throw std::invalid_argument("StudySpec: mesh sizes must be strictly ascending");
    }
  }
  if (!(tol > 0.0)) throw std::invalid_argument("StudySpec: tol must be positive");
  if (afem_initial_elements < 2) throw std::invalid_argument("StudySpec: afem initial mesh too small");
  if (!(afem_fit_from >= 0.0)) throw std::invalid_argument("StudySpec: afem_fit_from must be >= 0");
  afem.validate();
}

ErrorOracle::ErrorOracle(const RegisteredProblem& problem, const StudySpec& spec) : problem_(problem) {
  if (!problem_.has_exact()) {
    ref_ = std::make_shared<const Reference>(
        compute_reference(problem_.problem, spec.ref_elements, spec.ref_grading,
                          HMatrixOptions{spec.ref_rank, spec.hopts.n_min}));
  }
}

ErrorPair ErrorOracle::operator()(const Mesh1D& mesh, const Vector& u) const {
  if (problem_.has_exact()) return error_vs_exact(mesh, u, problem_.exact);
  return error_vs_reference(mesh, u, ref_->mesh, ref_->u);
}

void fit_report(ConvergenceReport& report, std::size_t min_n) {
  std::vector<double> n, e2, ei;
  auto collect = [&](std::size_t lo) {
    n.clear();
    e2.clear();
    ei.clear();
    for (const auto& r : report.rows) {
      if (r.N < lo || r.error_l2 <= 0.0 || r.status != "converged") continue;
      n.push_back(static_cast<double>(r.N));
      e2.push_back(r.error_l2);
      ei.push_back(r.error_linf);
    }
  };
  collect(min_n);
  if (n.size() < 3) collect(0);
  report.fitted = n.size() >= 3;
  if (!report.fitted) return;
  report.l2 = fit_rate(n, e2);
  report.linf = fit_rate(n, ei);
}

UniformStudy run_uniform_study(const StudySpec& spec, const ErrorOracle& err) {
  spec.validate();
  const RegisteredProblem rp = make_problem(spec.params);
  const FracProblem& problem = rp.problem;
  UniformStudy out;
  out.dense.path = "dense";
  out.hmatrix.path = "hmatrix";

  for (std::size_t ne : spec.elements) {
    const Mesh1D mesh = Mesh1D::uniform(problem.b, problem.c, ne);

    auto finish_row = [&](ConvergenceRow& row, const Vector& w) {
      const Vector u = with_boundary(mesh, problem, w);
      const auto t0 = Clock::now();
      row.eta = estimate(mesh, u).total;
      row.t_estimate = seconds_since(t0);
      const ErrorPair e = err(mesh, u);
      row.error_l2 = e.l2;
      row.error_linf = e.linf;
    };

    if (spec.dense_path) {
      ConvergenceRow row;
      row.N = mesh.num_interior();
      auto t0 = Clock::now();
      const Matrix A = assemble_dense(mesh, problem);
      const Vector F = assemble_rhs(mesh, problem);
      row.t_assemble = seconds_since(t0);
      t0 = Clock::now();
      const Vector w = A.partialPivLu().solve(F);
      row.t_solve = seconds_since(t0);
      finish_row(row, w);
      out.dense.rows.push_back(row);
    }

    if (spec.hmatrix_path) {
      ConvergenceRow row;
      row.N = mesh.num_interior();
      auto t0 = Clock::now();
      const MgHierarchy hier(MeshHierarchy::by_coarsening(mesh, spec.afem.coarse_cap), problem, spec.hopts,
                             spec.afem.coarse_cap);
      const Vector F = assemble_rhs(mesh, problem);
      row.t_assemble = seconds_since(t0);
      t0 = Clock::now();
      const SolveResult sol = solve(hier, F, spec.tol, spec.max_mg_iterations);
      row.t_solve = seconds_since(t0);
      row.mg_iters = sol.iterations;
      row.status = status_name(sol.status);
      finish_row(row, sol.u);
      out.hmatrix.rows.push_back(row);
    }
  }
  fit_report(out.dense);
  fit_report(out.hmatrix);
  return out;
}

ConvergenceReport run_afem_study(const StudySpec& spec, const ErrorOracle& err, AfemResult* out) {
  spec.validate();
  const RegisteredProblem rp = make_problem(spec.params);
  AfemConfig cfg = spec.afem;
  cfg.hopts = spec.hopts;
  cfg.tol = spec.tol;
  cfg.max_mg_iterations = spec.max_mg_iterations;
  const Mesh1D initial = Mesh1D::uniform(rp.problem.b, rp.problem.c, spec.afem_initial_elements);
  ErrorFunction ef = [&](const Mesh1D& m, const Vector& u) {
    const ErrorPair e = err(m, u);
    return std::make_pair(e.l2, e.linf);
  };
  AfemResult res = afem_loop(initial, rp.problem, cfg, ef);

  ConvergenceReport report;
  report.path = "afem";
  std::size_t total = 0;
  for (const AfemStep& s : res.history) {
    ConvergenceRow row;
    row.N = s.dofs;
    total += s.dofs;
    row.total_dofs = total;
    row.error_l2 = s.error_l2;
    row.error_linf = s.error_linf;
    row.eta = s.eta;
    row.mg_iters = s.mg_iterations;
    row.t_assemble = s.t_assemble;
    row.t_solve = s.t_solve;
    row.t_estimate = s.t_estimate;
    row.t_mark = s.t_mark;
    row.t_refine = s.t_refine;
    row.status = status_name(s.status);
    report.rows.push_back(row);
  }
  fit_report(report, static_cast<std::size_t>(std::llround(spec.afem_fit_from * static_cast<double>(initial.num_interior()))));
  if (out) *out = std::move(res);
  return report;
}

DecayRow decay_point(double alpha, double ratio, int k) {
  constexpr std::size_t n_elements = 512;
  constexpr std::size_t block = 32;
  const Mesh1D mesh = Mesh1D::uniform(0.0, 1.0, n_elements);
  const IndexRange rows{0, block};
  const auto col_lo = static_cast<std::size_t>(std::llround((block + 1) * (1.0 + ratio)));
  const IndexRange cols{col_lo, col_lo + block};
  if (cols.hi > mesh.num_interior()) throw std::invalid_argument("decay_point: ratio too large");

  // Columns lie right of the rows, so only the right-sided weight enters;
  // the sign cancels in relative errors and is kept positive here.
  const double kappa = 1.0;
  const EntryEvaluator eval(mesh, alpha, 0.0, kappa);
  Matrix B(block, block);
  for (std::size_t i = 0; i < block; ++i) {
    for (std::size_t j = 0; j < block; ++j) {
      B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = eval(rows.lo + i, cols.lo + j);
    }
  }
  const double x_lo = mesh.node(rows.lo), x_hi = mesh.node(rows.hi + 1);
  const TaylorFactorization fac{k, 0.5 * (x_lo + x_hi)};
  const double rho = 0.5 * (x_hi - x_lo);
  const Matrix C = far_field_factor_C(mesh, rows, fac, rho);
  const Matrix R = far_field_factor_R(mesh, cols, fac, alpha, rho);
  const Matrix Bk = (kappa / std::tgamma(2.0 - alpha)) * C * R.transpose();

  DecayRow row{alpha, ratio, k, (B - Bk).norm(), 0.0};
  row.rel_error = row.error / B.norm();
  return row;
}

std::vector<DecayRow> run_hmat_decay(const std::vector<double>& alphas, const std::vector<double>& ratios,
                                     const std::vector<int>& ks) {
  std::vector<DecayRow> rows;
  for (double a : alphas) {
    for (double r : ratios) {
      for (int k : ks) rows.push_back(decay_point(a, r, k));
    }
  }
  return rows;
}

std::vector<MgCell> run_mg_table(const StudySpec& spec, const std::vector<double>& alphas,
                                 const std::vector<std::size_t>& elements) {
  std::vector<MgCell> cells;
  for (double a : alphas) {
    ProblemParams p = spec.params;
    p.alpha = a;
    const FracProblem problem = make_problem(p).problem;
    for (std::size_t ne : elements) {
      MgCell cell{a, ne, 0, "", 0.0};
      const auto t0 = Clock::now();
      try {
        const Mesh1D mesh = Mesh1D::uniform(problem.b, problem.c, ne);
        const MgHierarchy hier(MeshHierarchy::by_coarsening(mesh, spec.afem.coarse_cap), problem, spec.hopts,
                               spec.afem.coarse_cap);
        const SolveResult sol = solve(hier, assemble_rhs(mesh, problem), spec.tol, spec.max_mg_iterations);
        cell.iterations = sol.iterations;
        cell.status = status_name(sol.status);
      } catch (const std::exception& e) {
        cell.status = std::string("error: ") + e.what();
      }
      cell.seconds = seconds_since(t0);
      cells.push_back(cell);
    }
  }
  return cells;
}

CostScaling run_cost_scaling(const StudySpec& spec, const std::vector<std::size_t>& dense_elements,
                             const std::vector<std::size_t>& hmatrix_elements) {
  const FracProblem problem = make_problem(spec.params).problem;
  CostScaling out;
  std::vector<double> dn, dt, ds, hn, ht;
  for (std::size_t ne : dense_elements) {
    const Mesh1D mesh = Mesh1D::uniform(problem.b, problem.c, ne);
    CostRow row{"dense_lu", mesh.num_interior()};
    auto t0 = Clock::now();
    const Matrix A = assemble_dense(mesh, problem);
    const Vector F = assemble_rhs(mesh, problem);
    row.t_assemble = seconds_since(t0);
    t0 = Clock::now();
    const Vector w = A.partialPivLu().solve(F);
    row.t_solve = seconds_since(t0);
    row.t_total = row.t_assemble + row.t_solve;
    row.storage = static_cast<std::size_t>(A.size());
    if (!w.allFinite()) throw std::runtime_error("run_cost_scaling: dense solve failed");
    dn.push_back(static_cast<double>(row.N));
    dt.push_back(row.t_total);
    ds.push_back(row.t_solve);
    out.rows.push_back(row);
  }
  for (std::size_t ne : hmatrix_elements) {
    const Mesh1D mesh = Mesh1D::uniform(problem.b, problem.c, ne);
    CostRow row{"hmatrix_mg", mesh.num_interior()};
    auto t0 = Clock::now();
    const MgHierarchy hier(MeshHierarchy::by_coarsening(mesh, spec.afem.coarse_cap), problem, spec.hopts,
                           spec.afem.coarse_cap);
    const Vector F = assemble_rhs(mesh, problem);
    row.t_assemble = seconds_since(t0);
    t0 = Clock::now();
    const SolveResult sol = solve(hier, F, spec.tol, spec.max_mg_iterations);
    row.t_solve = seconds_since(t0);
    row.t_total = row.t_assemble + row.t_solve;
    row.iterations = sol.iterations;
    row.storage = storage_scalars(hier.op(hier.finest()));
    hn.push_back(static_cast<double>(row.N));
    ht.push_back(row.t_total);
    out.rows.push_back(row);
  }
  // fit_rate returns the decay rate of E = C N^{-r}; growth exponents are -r.
  if (dn.size() >= 3) {
    out.dense_exponent = -fit_rate(dn, dt).rate;
    out.dense_lu_exponent = -fit_rate(dn, ds).rate;
  }
  if (hn.size() >= 3) out.hmatrix_exponent = -fit_rate(hn, ht).rate;
  return out;
}

void write_convergence_csv(std::ostream& out, const ConvergenceReport& report) {
  const auto old = out.precision(10);
  out << "N,error_l2,error_linf,eta,mg_iters,t_assemble,t_solve,t_estimate,t_mark,t_refine\n";
  for (const auto& r : report.rows) {
    out << r.N << ',' << r.error_l2 << ',' << r.error_linf << ',' << r.eta << ',' << r.mg_iters << ','
        << r.t_assemble << ',' << r.t_solve << ',' << r.t_estimate << ',' << r.t_mark << ',' << r.t_refine << '\n';
  }
  out.precision(old);
}

void write_decay_csv(std::ostream& out, const std::vector<DecayRow>& rows) {
  const auto old = out.precision(10);
  out << "alpha,ratio,k,error,rel_error\n";
  for (const auto& r : rows) {
    out << r.alpha << ',' << r.ratio << ',' << r.k << ',' << r.error << ',' << r.rel_error << '\n';
  }
  out.precision(old);
}

void write_mg_csv(std::ostream& out, const std::vector<MgCell>& cells) {
  out << "alpha,h_inv,N,iterations,status,seconds\n";
  for (const auto& c : cells) {
    out << c.alpha << ',' << c.elements << ',' << c.elements - 1 << ',' << c.iterations << ',' << c.status << ','
        << c.seconds << '\n';
  }
}

void write_cost_csv(std::ostream& out, const CostScaling& cost) {
  out << "method,N,t_assemble,t_solve,t_total,storage,iterations\n";
  for (const auto& r : cost.rows) {
    out << r.method << ',' << r.N << ',' << r.t_assemble << ',' << r.t_solve << ',' << r.t_total << ','
        << r.storage << ',' << r.iterations << '\n';
  }
}

}  // namespace fracfem
