// OpenMP kernels against their serial references. Set OMP_NUM_THREADS to
// compare thread counts; on one core the pairs should match.

#include <benchmark/benchmark.h>

#include <random>

#include "fracfem/hmatrix.hpp"

using namespace fracfem;

namespace {

FracProblem problem() { return FracProblem::riesz(1.5, [](double) { return 1.0; }); }

Vector random_vector(Eigen::Index n) {
  std::mt19937 rng(1);
  std::normal_distribution<double> g;
  Vector x(n);
  for (auto& v : x) v = g(rng);
  return x;
}

template <Vector (*Mv)(const HMatrix&, const Vector&)>
void BM_hmatvec(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const HMatrix H = assemble_hmatrix(Mesh1D::uniform(0, 1, n), problem(), {10, 32});
  const Vector x = random_vector(static_cast<Eigen::Index>(n - 1));
  for (auto _ : state) benchmark::DoNotOptimize(Mv(H, x));
  state.SetComplexityN(state.range(0));
  state.counters["scalars"] = static_cast<double>(storage_scalars(H));
}

template <Matrix (*Assemble)(const Mesh1D&, const FracProblem&)>
void BM_assemble_dense(benchmark::State& state) {
  const Mesh1D m = Mesh1D::uniform(0, 1, static_cast<std::size_t>(state.range(0)));
  const FracProblem p = problem();
  for (auto _ : state) benchmark::DoNotOptimize(Assemble(m, p));
  state.SetComplexityN(state.range(0));
}

}  // namespace

BENCHMARK(BM_hmatvec<hmatvec>)->Name("hmatvec")->RangeMultiplier(4)->Range(256, 16384)->Complexity();
BENCHMARK(BM_hmatvec<hmatvec_reference>)->Name("hmatvec_reference")->RangeMultiplier(4)->Range(256, 16384)->Complexity();
BENCHMARK(BM_assemble_dense<assemble_dense>)->Name("assemble_dense")->RangeMultiplier(2)->Range(128, 1024)->Unit(benchmark::kMillisecond)->Complexity(benchmark::oNSquared);
BENCHMARK(BM_assemble_dense<assemble_dense_reference>)->Name("assemble_dense_reference")->RangeMultiplier(2)->Range(128, 1024)->Unit(benchmark::kMillisecond)->Complexity(benchmark::oNSquared);

BENCHMARK_MAIN();
