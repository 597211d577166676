#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "fingersel/helegeom.hpp"
#include "fingersel/inner.hpp"
#include "fingersel/outerp.hpp"
#include "fingersel/spectrum.hpp"

using namespace fsel;

static void BM_InnerSolve(benchmark::State& st) {
  const double alpha = static_cast<double>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(solve_inner(alpha, 40.0, 1e-10));
}
BENCHMARK(BM_InnerSolve)->Arg(0)->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond);

static void BM_StokesEstimate(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(stokes_estimate(1.0, 1e-10));
}
BENCHMARK(BM_StokesEstimate)->Unit(benchmark::kMillisecond);

static void BM_EvalP(benchmark::State& st) {
  const cplx xi(1.5, -0.2);
  for (auto _ : st) benchmark::DoNotOptimize(eval_P(xi, 1.2));
}
BENCHMARK(BM_EvalP)->Unit(benchmark::kMicrosecond);

static void BM_CauchyBelow(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(cauchy_I_below(0.7, 1.0));
}
BENCHMARK(BM_CauchyBelow)->Unit(benchmark::kMicrosecond);

static void BM_ApplyU(benchmark::State& st) {
  const Params prm = params_from_gamma_eps(1.0, 0.35);
  OuterConfig cfg;
  cfg.nodes = static_cast<int>(st.range(0));
  const OuterContour c = build_contour(prm, cfg);
  std::vector<cplx> N(c.xi.size());
  for (std::size_t j = 0; j < N.size(); ++j) N[j] = std::exp(-std::norm(c.xi[j] + 1.0));
  for (auto _ : st) benchmark::DoNotOptimize(apply_U(N, c, prm));
}
BENCHMARK(BM_ApplyU)->Arg(500)->Arg(2000)->Unit(benchmark::kMicrosecond);

static void BM_PicardLocal(benchmark::State& st) {
  const Params prm = params_from_gamma_eps(1.0, 0.35);
  for (auto _ : st) benchmark::DoNotOptimize(picard_solve(prm));
}
BENCHMARK(BM_PicardLocal)->Unit(benchmark::kMillisecond)->Iterations(1);
BENCHMARK_MAIN();
