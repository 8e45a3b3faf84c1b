#include <benchmark/benchmark.h>

#include <vector>

#include "degcarl/carleman.hpp"
#include "degcarl/fields.hpp"
#include "degcarl/hardy.hpp"
#include "degcarl/observability.hpp"

using namespace degcarl;

namespace {

ProblemSpec wwd(int N, int M) {
  ProblemSpec s;
  s.a = CoefficientFn::power(0.25, 0.5);
  s.b = CoefficientFn::power(0.25, 0.5);
  s.lambda = -1.0;
  s.N = N;
  s.M = M;
  return s;
}

void BM_BestConstant(benchmark::State& state) {
  const ProblemSpec s = wwd(static_cast<int>(state.range(0)), 100);
  const Grid g = build_grid(s);
  for (auto _ : state) benchmark::DoNotOptimize(best_constant(HardyVariant::CstarDirichlet, s, g).C_best);
}
BENCHMARK(BM_BestConstant)->Arg(100)->Arg(200)->Arg(400)->Unit(benchmark::kMicrosecond);

void BM_Step(benchmark::State& state) {
  const ProblemSpec s = wwd(static_cast<int>(state.range(0)), 100);
  const Grid g = build_grid(s);
  const Stepper stepper(s, g);
  Rng rng(1);
  const std::vector<double> u0 = smooth_random_field(g, s.bc, rng);
  std::vector<double> u;
  for (auto _ : state) {
    u = u0;  // repeated decay would drift into subnormals
    stepper.step(u, {}, 1.0, 0);
    benchmark::DoNotOptimize(u.data());
  }
}
BENCHMARK(BM_Step)->Arg(100)->Arg(400)->Arg(1600);

void BM_ForwardSolve(benchmark::State& state) {
  const ProblemSpec s = wwd(200, static_cast<int>(state.range(0)));
  const Grid g = build_grid(s);
  Rng rng(2);
  const auto u0 = smooth_random_field(g, s.bc, rng);
  for (auto _ : state) benchmark::DoNotOptimize(solve_forward(u0, nullptr, s, g).fields.back()[0]);
}
BENCHMARK(BM_ForwardSolve)->Arg(200)->Arg(800)->Unit(benchmark::kMicrosecond);

void BM_Hum(benchmark::State& state) {
  ProblemSpec s;
  s.N = static_cast<int>(state.range(0));
  s.M = 400;
  s.T = 0.1;
  const Grid g = build_grid(s);
  const auto u0 = sine_mode(g, 1);
  for (auto _ : state) benchmark::DoNotOptimize(hum_control(u0, s, g, 1e-3, 200).final_norm_ratio);
}
BENCHMARK(BM_Hum)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_CarlemanSides(benchmark::State& state) {
  ProblemSpec s = wwd(static_cast<int>(state.range(0)), 400);
  s.T = 3.0;
  const Grid g = build_grid(s);
  const CarlemanWeights w = build_weights(s, g, 1.0, 1.0, 1.5);
  const auto cases = manufactured_family(1, 1, s, g);
  for (auto _ : state) benchmark::DoNotOptimize(carleman_sides(cases[0].v, cases[0].h, 20.0, w, s, g).lhs);
}
BENCHMARK(BM_CarlemanSides)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
