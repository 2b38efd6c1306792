#include <benchmark/benchmark.h>

#include <vector>

#include "wflow/brackets.hpp"
#include "wflow/oracles.hpp"
#include "wflow/states.hpp"
#include "wflow/stencil.hpp"
#include "wflow/stepper.hpp"

namespace {

using namespace wflow;

void BM_Derivative(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const PhaseGrid g(n, n, -6, 6, -6, 6);
  const auto W = gaussian_state(1, 1, 0.7, 0.7, g);
  const Derivative1D d(n, g.dp(), 3);
  std::vector<double> out(g.size());
  for (auto _ : state) {
    apply_along(d, Axis::p, g, W.values(), out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(g.size()));
}
BENCHMARK(BM_Derivative)->Arg(128)->Arg(256)->Arg(512);

void BM_Rhs(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const PhaseGrid g(n, n, -5, 5, -6, 6);
  GeneratorSpec spec;
  spec.gamma = 0.05;
  spec.Gamma = 0.1;
  spec.hbar2_correction = state.range(1) != 0;
  RhsEvaluator ev(spec, HamiltonianModel::double_well(1, 1, 0.1, Drive{0.2, 1}), g);
  const auto W = gaussian_state(2.19, 0, 0.5, 1.0, g);
  std::vector<double> out(g.size());
  double t = 0.0;
  for (auto _ : state) {
    ev.evaluate(W.values(), t, out);
    t += 1e-3;
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(g.size()));
}
BENCHMARK(BM_Rhs)->Args({128, 0})->Args({128, 1})->Args({256, 1});

void BM_Rk4Step(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const PhaseGrid g(n, n, -6, 6, -6, 6);
  GeneratorSpec spec;
  spec.gamma = 0.3;
  Rk4Stepper st(spec, HamiltonianModel::harmonic(1, 1), g);
  const auto W0 = gaussian_state(1, 1, 0.7071, 0.7071, g);
  std::vector<double> W(W0.values().begin(), W0.values().end());
  const double dt = st.bound().dt;
  double t = 0.0;
  for (auto _ : state) {
    st.step(W, t, dt);
    t += dt;
  }
}
BENCHMARK(BM_Rk4Step)->Arg(128)->Arg(256);

void BM_HeatKernelPoint(benchmark::State& state) {
  const auto f = heat_kernel_function(gaussian_function({1, 1, 0.7071, 0.7071}), 0.3, 2.0, 1, 1);
  double x = -1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(f(x, 0.5));
    x += 1e-6;
  }
}
BENCHMARK(BM_HeatKernelPoint);

}  // namespace

BENCHMARK_MAIN();
