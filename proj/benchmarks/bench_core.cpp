#include "gradcert/estimator.hpp"
#include "gradcert/majorant.hpp"
#include "gradcert/methods.hpp"
#include "gradcert/problems.hpp"

#include <benchmark/benchmark.h>

using namespace gradcert;

namespace {

void BM_MajorantW(benchmark::State& state) {
  const double mu = static_cast<double>(state.range(0)) / 100.0;
  const auto b = constant_bounds(1.0, 1.0, mu, lipschitz_modulus(1.0), 1.0);
  const double phi = 0.5 * phi_star(b, 1.0, 0.0).value();
  for (auto _ : state) benchmark::DoNotOptimize(majorant_w(b, 1.0, 0.0, phi));
}
BENCHMARK(BM_MajorantW)->Arg(10)->Arg(50)->Arg(90)->Arg(99);

void BM_Certify(benchmark::State& state) {
  const Problem p = make_problem("chandrasekhar");
  const auto b = p.certified_bounds({MethodFamily::SteepestDescent, 1.0}, SpaceGeometry::euclidean()).value();
  const double a = p.eval_f(p.x0).norm();
  for (auto _ : state) benchmark::DoNotOptimize(certify(b, 1.0, a));
}
BENCHMARK(BM_Certify)->Unit(benchmark::kMicrosecond);

void BM_SolveChandrasekhar(benchmark::State& state) {
  const Problem p = make_problem("chandrasekhar", {{"n", {static_cast<double>(state.range(0))}}});
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve(p, {MethodFamily::SteepestDescent, 1.0}, SpaceGeometry::euclidean(), {1e-10, 1000}));
  }
}
BENCHMARK(BM_SolveChandrasekhar)->Arg(20)->Arg(100)->Arg(400)->Unit(benchmark::kMicrosecond);

void BM_EstimateNuTilde(benchmark::State& state) {
  const Problem p = make_problem("chandrasekhar", {{"n", {8}}});
  const SamplePlan plan{1, 16, static_cast<std::size_t>(state.range(0)), false};
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_nu_tilde(p, {MethodFamily::MinResidual, 1.0}, SpaceGeometry::euclidean(), p.R, plan));
  }
}
BENCHMARK(BM_EstimateNuTilde)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
