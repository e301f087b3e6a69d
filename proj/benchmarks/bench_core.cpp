#include <benchmark/benchmark.h>

#include <cmath>

#include "qhit/driving.hpp"
#include "qhit/interval_maps.hpp"
#include "qhit/measures.hpp"
#include "qhit/quenched_law.hpp"
#include "qhit/short_returns.hpp"
#include "qhit/transfer.hpp"

using namespace qhit;

namespace {

MapSystem expanding() { return MapSystem({FiberMap::multiply_mod1(2), FiberMap::multiply_mod1(3)}); }
MapSystem pm() { return MapSystem({FiberMap::pomeau_manneville(0.1), FiberMap::pomeau_manneville(0.3)}); }

DrivingConfig coin() {
  DrivingConfig d;
  d.seed = 7;
  return d;
}

void BM_UlamBuild(benchmark::State& state) {
  const MapSystem s = pm();
  const auto bins = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ulam_matrix(s.map(1), bins));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_UlamBuild)->RangeMultiplier(4)->Range(1 << 10, 1 << 16)->Complexity();

void BM_UlamPush(benchmark::State& state) {
  const MapSystem s = pm();
  const auto bins = static_cast<std::size_t>(state.range(0));
  const UlamMatrix P = ulam_matrix(s.map(0), bins);
  std::vector<double> in(bins, 1.0), out(bins);
  for (auto _ : state) {
    P.apply(in, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_UlamPush)->RangeMultiplier(4)->Range(1 << 10, 1 << 16);

void BM_QuenchedDensity(benchmark::State& state) {
  const UlamFamily family(pm(), 4096);
  const Realisation omega(coin());
  for (auto _ : state) benchmark::DoNotOptimize(quenched_density(family, omega, 100));
}
BENCHMARK(BM_QuenchedDensity)->Unit(benchmark::kMillisecond);

void BM_TailedOrbitStep(benchmark::State& state) {
  const MapSystem s = expanding();
  const Realisation omega(coin());
  Trajectory t = Trajectory::tailed(s, omega, 0.1234, 99);
  for (auto _ : state) {
    t.step();
    benchmark::DoNotOptimize(t.position());
  }
}
BENCHMARK(BM_TailedOrbitStep);

void BM_FloatingOrbitStepPm(benchmark::State& state) {
  const MapSystem s = pm();
  const Realisation omega(coin());
  Trajectory t = Trajectory::floating(s, omega, 0.1234);
  for (auto _ : state) {
    t.step();
    benchmark::DoNotOptimize(t.position());
  }
}
BENCHMARK(BM_FloatingOrbitStepPm);

void BM_HittingLaw(benchmark::State& state) {
  const MapSystem s = expanding();
  const Realisation omega(coin());
  const Ball b(0.3, 1.0 / 1024);
  const auto h = quenched_density(s, omega, 30, 1024).density;
  LawConfig cfg;
  for (int i = 1; i <= 50; ++i) cfg.t_grid.push_back(0.1 * i);
  cfg.n_samples = static_cast<std::size_t>(state.range(0));
  cfg.seed = 5;
  const double mu_b = 2.0 / 1024;
  for (auto _ : state) benchmark::DoNotOptimize(hitting_law(s, omega, b, mu_b, h, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_HittingLaw)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_ShortReturnIndicator(benchmark::State& state) {
  const MapSystem s = expanding();
  const Realisation omega(coin());
  const double rho = 1e-3;
  const std::size_t J = short_return_horizon(0.5, rho);
  double x = 0.0;
  for (auto _ : state) {
    x = std::fmod(x + 0.6180339887498949, 1.0);
    benchmark::DoNotOptimize(short_return_indicator(s, omega, x, rho, J));
  }
}
BENCHMARK(BM_ShortReturnIndicator);

}  // namespace
BENCHMARK_MAIN();
