#include <benchmark/benchmark.h>

#include <cmath>

#include "flowlab/estimators.hpp"
#include "flowlab/flow.hpp"
#include "flowlab/flow_calculus.hpp"
#include "flowlab/paths.hpp"
#include "flowlab/regime.hpp"
#include "flowlab/resolvent.hpp"

using namespace flowlab;

static void BM_SampleBrownianPath(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const TimeGrid g = make_graded_grid(1.0, n, std::nullopt, 1.0);
  std::uint64_t seed = 1;
  for (auto _ : state) {
    const BrownianPath p = sample_brownian(2, g, seed++);
    benchmark::DoNotOptimize(p.values.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_SampleBrownianPath)->Arg(1 << 10)->Arg(1 << 13)->Arg(1 << 16);

static void BM_BridgeRefine(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const TimeGrid gc = make_graded_grid(0.5, n, 0.5, 2.0);
  const TimeGrid gf = make_graded_grid(0.5, 2 * n, 0.5, 2.0);
  const BrownianPath pc = sample_brownian(2, gc, 7);
  for (auto _ : state) {
    const BrownianPath pf = refine_bridge(pc, gf);
    benchmark::DoNotOptimize(pf.values.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_BridgeRefine)->Arg(1 << 12)->Arg(1 << 15);

static void BM_SingularTimeIntegral(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const DriftField drift = make_counterexample_drift(0.5, 0.05, 0.5, 0.5);
  const TimeProfile prof = profile_from_drift(drift);
  const TimeGrid g = make_graded_grid(0.5, n, 0.5, 2.0);
  const BrownianPath p = sample_brownian(2, g, 13);
  const auto geval = [](double v) { return eval_g(v, 0.5); };
  for (auto _ : state) {
    const double v = singular_time_integral(p, prof, geval, 0.25, 0.5);
    benchmark::DoNotOptimize(v);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_SingularTimeIntegral)->Arg(1 << 12)->Arg(1 << 16);

static void BM_IntegrateFlowShear(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const DriftField drift = make_counterexample_drift(0.5, 0.05, 0.5, 0.5);
  const TimeGrid g = make_graded_grid(0.5, n, 0.5, 2.0);
  const BrownianPath p = sample_brownian(2, g, 17);
  for (auto _ : state) {
    const FlowTrajectory traj = integrate_flow(drift, p, vec2(0.25, 0.0));
    benchmark::DoNotOptimize(traj.states.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_IntegrateFlowShear)->Arg(1 << 12)->Arg(1 << 16);

static void BM_IntegrateFlowSmooth(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const DriftField drift = make_smooth_bump_drift(2, 0.8, 1.0);
  const TimeGrid g = make_graded_grid(1.0, n, std::nullopt, 1.0);
  const BrownianPath p = sample_brownian(2, g, 19);
  for (auto _ : state) {
    const FlowTrajectory traj = integrate_flow(drift, p, vec2(0.45, -0.2));
    benchmark::DoNotOptimize(traj.states.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_IntegrateFlowSmooth)->Arg(1 << 12)->Arg(1 << 16);

static void BM_PropagateJacobian(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const DriftField drift = make_smooth_bump_drift(2, 0.8, 1.0);
  const TimeGrid g = make_graded_grid(1.0, n, std::nullopt, 1.0);
  const BrownianPath p = sample_brownian(2, g, 23);
  const FlowTrajectory traj = integrate_flow(drift, p, vec2(0.45, -0.2));
  for (auto _ : state) {
    const JacobianPath jac = propagate_jacobian(drift, traj);
    benchmark::DoNotOptimize(jac.matrices.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_PropagateJacobian)->Arg(1 << 12)->Arg(1 << 14);

static void BM_SemigroupApply2D(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const GridBox box = make_grid_2d(7.5, n);
  const GridFunction phi = make_grid_function(
      box, [](const Vec& x) { return std::max(0.0, 1.0 - std::pow(x.norm(), 0.6)); });
  for (auto _ : state) {
    const GridFunction out = semigroup_apply(phi, 0.25);
    benchmark::DoNotOptimize(out.values.data());
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_SemigroupApply2D)->Arg(101)->Arg(201)->Unit(benchmark::kMillisecond);

static void BM_ResolventSolve1D(benchmark::State& state) {
  const GridBox box = make_grid_1d(-8.0, 8.0, 1601);
  SeparableSource f;
  f.time_factor = [](double s) { return std::pow(s, -0.2); };
  f.spatial = make_grid_function(
      box, [](const Vec& x) { return std::max(0.0, 1.0 - std::pow(std::abs(x[0]), 0.6)); });
  for (auto _ : state) {
    const ResolventResult res = resolvent_solve(f, 4.0, 1.0, 0.0);
    benchmark::DoNotOptimize(res.U.values.data());
  }
}
BENCHMARK(BM_ResolventSolve1D)->Unit(benchmark::kMillisecond);

static void BM_SobolevNormSweep(benchmark::State& state) {
  const long long n_paths = state.range(0);
  const DriftField drift = make_counterexample_drift(0.5, 0.05, 0.25, 0.25);
  const InitialDatum datum = build_counterexample_datum(2.0, 0.05, 1.0);
  SobolevOptions opts;
  opts.n_steps = 512;
  opts.workers = 1;
  std::uint64_t seed = 3;
  for (auto _ : state) {
    const auto rows = mc_sobolev_norm_sweep(datum, drift, 0.25, 2.0, 1.0, {0.04, 0.02, 0.01},
                                            n_paths, seed++, opts);
    benchmark::DoNotOptimize(rows.data());
  }
  state.SetItemsProcessed(state.iterations() * n_paths);
}
BENCHMARK(BM_SobolevNormSweep)->Arg(8)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_InverseGradientMoment(benchmark::State& state) {
  const DriftField bump = make_smooth_bump_drift(2, 0.5, 1.0);
  std::uint64_t seed = 5;
  for (auto _ : state) {
    const auto est = mc_inverse_gradient_moment(bump, 2.0, 2.0, 32, 17, 16, seed++, 1);
    benchmark::DoNotOptimize(est.mean);
  }
  state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_InverseGradientMoment)->Unit(benchmark::kMillisecond);

static void BM_IndicatorQuadrature(benchmark::State& state) {
  for (auto _ : state) {
    const double v = exact_indicator_expectation(0.3, 0.5, 1.0, 10.0, 0.5);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_IndicatorQuadrature);

static void BM_IndicatorMonteCarlo(benchmark::State& state) {
  const long long n = state.range(0);
  std::uint64_t seed = 11;
  for (auto _ : state) {
    const auto est = mc_indicator_expectation(0.3, 0.5, 1.0, 10.0, 0.5, n, seed++, 1);
    benchmark::DoNotOptimize(est.mean);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_IndicatorMonteCarlo)->Arg(1 << 16);

int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  return 0;
}
