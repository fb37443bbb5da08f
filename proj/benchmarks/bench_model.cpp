#include <benchmark/benchmark.h>

#include "wpan/driver.hpp"
#include "wpan/phy.hpp"
#include "wpan/sim.hpp"

namespace {

wpan::MacParams mac_with(int n) {
  wpan::MacParams mac;
  mac.n_nodes = n;
  return mac;
}

void BM_SolveChain(benchmark::State& state) {
  const auto in = wpan::ChainInputs::from(mac_with(static_cast<int>(state.range(0))), 0.5, 0.4);
  for (auto _ : state) benchmark::DoNotOptimize(wpan::solve_chain(in));
}
BENCHMARK(BM_SolveChain)->Arg(5)->Arg(10)->Arg(50);

void BM_Converge(benchmark::State& state) {
  const auto s = wpan::Scenario::make(mac_with(10), static_cast<double>(state.range(0)),
                                      wpan::Mode::kPhyMac, 0.427);
  for (auto _ : state) benchmark::DoNotOptimize(wpan::converge(s));
}
BENCHMARK(BM_Converge)->Arg(1)->Arg(4)->Arg(11)->Arg(25);

void BM_ExpectedPe(benchmark::State& state) {
  wpan::PeSamplerConfig sampler;
  sampler.n_samples = static_cast<std::size_t>(state.range(0));
  const wpan::PhyParams phy;
  for (auto _ : state) benchmark::DoNotOptimize(wpan::expected_pe(phy, sampler, 1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ExpectedPe)->Arg(4096)->Arg(32768)->Unit(benchmark::kMillisecond);

void BM_Simulator(benchmark::State& state) {
  const auto s = wpan::Scenario::make(mac_with(static_cast<int>(state.range(0))), 5.0,
                                      wpan::Mode::kPhyMac, 0.1);
  wpan::sim::SimConfig cfg;
  cfg.horizon_slots = 100'000;
  for (auto _ : state) benchmark::DoNotOptimize(wpan::sim::run(s, cfg));
  state.SetItemsProcessed(state.iterations() * cfg.horizon_slots);
}
BENCHMARK(BM_Simulator)->Arg(2)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
