// Copyright The lapwave Authors.
// SPDX-License-Identifier: Apache-2.0

// Timings of the hot paths: pencil assembly, cell factorization, the quadratic
// eigenproblem and a full CCI solve (which is dominated by the coupled sweep).

#include <map>
#include <benchmark/benchmark.h>
#include "lapwave/cci.hpp"
#include "lapwave/decomposition.hpp"
#include "lapwave/fem.hpp"
#include "lapwave/problem.hpp"
#include "lapwave/sparse_lu.hpp"
#include "lapwave/spectral.hpp"

namespace lapwave
{
namespace
{

double MeshSize(const benchmark::State &state) { return 1.0 / state.range(0); }

const Discretization &CachedDisc(double h)
{
  static std::map<double, Discretization> cache;
  auto it = cache.find(h);
  if (it == cache.end())
  {
    const ScatteringProblem p = ExampleProblem(ExampleId::example1);
    it = cache.emplace(h, Discretize(p.n, h, p.bc)).first;
  }
  return it->second;
}

void BM_Discretize(benchmark::State &state)
{
  const ScatteringProblem p = ExampleProblem(ExampleId::example1);
  for (auto _ : state)
  {
    benchmark::DoNotOptimize(Discretize(p.n, MeshSize(state), p.bc));
  }
  state.counters["dofs"] = CachedDisc(MeshSize(state)).basis.m_prime;
}
BENCHMARK(BM_Discretize)->Arg(25)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_FactorCell(benchmark::State &state)
{
  const ScatteringProblem p = ExampleProblem(ExampleId::example1);
  const Discretization &d = CachedDisc(MeshSize(state));
  const SpMat A = d.P.Evaluate(cplx(0.4, -0.2), p.k);
  const auto symbolic = SparseLU::Analyze(A);
  for (auto _ : state)
  {
    SparseLU lu;
    lu.Factor(A, symbolic);
    benchmark::DoNotOptimize(lu.PivotRatio());
  }
}
BENCHMARK(BM_FactorCell)->Arg(25)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_ExceptionalValues(benchmark::State &state)
{
  const ScatteringProblem p = ExampleProblem(ExampleId::example1);
  const Discretization &d = CachedDisc(MeshSize(state));
  for (auto _ : state)
  {
    benchmark::DoNotOptimize(FindExceptionalValues(d.P, p.k));
  }
}
BENCHMARK(BM_ExceptionalValues)->Arg(25)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_CciSolve(benchmark::State &state)
{
  const ScatteringProblem p = ExampleProblem(ExampleId::example1);
  const Discretization &d = CachedDisc(0.04);
  CciOptions o;
  o.N = static_cast<int>(state.range(0));
  for (auto _ : state)
  {
    benchmark::DoNotOptimize(CciSolve(p, d, o));
  }
}
BENCHMARK(BM_CciSolve)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_DecompSolve(benchmark::State &state)
{
  const ScatteringProblem p = ExampleProblem(ExampleId::example1);
  const Discretization &d = CachedDisc(0.04);
  const SpectralAnalysis sa = AnalyzeSpectrum(d.P, p.k);
  DecompOptions o;
  o.N = static_cast<int>(state.range(0));
  for (auto _ : state)
  {
    benchmark::DoNotOptimize(DecompSolve(p, d, o, &sa));
  }
}
BENCHMARK(BM_DecompSolve)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace lapwave

BENCHMARK_MAIN();
