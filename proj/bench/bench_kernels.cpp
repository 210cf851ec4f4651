// Serial vs OpenMP timings of the Monte Carlo and grid kernels.

#include <benchmark/benchmark.h>

#include "sccsim/dynamics.hpp"
#include "sccsim/protocol.hpp"
#include "sccsim/readout.hpp"
#include "sccsim/stochastic.hpp"

using namespace sccsim;

namespace {

Execution plan(const benchmark::State& state) { return state.range(0) ? Execution::Parallel : Execution::Serial; }

void BM_SampleHistogram(benchmark::State& state) {
  const auto lasers = LaserConfig::scc(2.79);
  for (auto _ : state) {
    auto h = sample_histogram(RateSet{}, lasers, Level::Ground0, 10.0, DetectorModel{}, 20000, 1, plan(state));
    benchmark::DoNotOptimize(h);
  }
  state.SetItemsProcessed(state.iterations() * 20000);
}
BENCHMARK(BM_SampleHistogram)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_SimulateShot(benchmark::State& state) {
  const auto seq = build_scc_sequence(5, 2.0, LaserConfig::scc(2.79), true);
  for (auto _ : state) {
    auto h = simulate_shot(RateSet{}, seq, ErrorBudget{}, DetectorModel{}, ChargeReadoutModel{}, 1, 20000, {},
                           plan(state));
    benchmark::DoNotOptimize(h);
  }
}
BENCHMARK(BM_SimulateShot)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_ChargeFidelityMap(benchmark::State& state) {
  std::vector<double> rates, lifetimes;
  for (int i = 0; i < 12; ++i) rates.push_back(5.0 + 10.0 * i);
  for (int i = 0; i < 8; ++i) lifetimes.push_back(1.0 * std::pow(3.0, i));
  const auto windows = default_window_grid();
  for (auto _ : state) {
    auto cells = charge_fidelity_map(rates, lifetimes, 2.5, windows, plan(state));
    benchmark::DoNotOptimize(cells);
  }
}
BENCHMARK(BM_ChargeFidelityMap)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_FidelityMap(benchmark::State& state) {
  std::vector<double> ion;
  for (int i = 0; i <= 400; ++i) ion.push_back(0.25 * i);
  for (auto _ : state) {
    auto f = fidelity_map(0.2, ion, ErrorBudget::readout_only(), RateSet{}, SccSchedule{}, plan(state));
    benchmark::DoNotOptimize(f);
  }
}
BENCHMARK(BM_FidelityMap)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
