#include <benchmark/benchmark.h>

#include "atx/cli/sweep.hpp"

namespace {

atx::sim::Scenario load(const char* id) {
  return atx::sim::load_scenario(std::string(ATX_SCENARIO_DIR) + "/" + id + ".json");
}

const char* const kScenarios[] = {"fig1_fair_n4", "fig3_three_owners", "fig4_byz_doublespend_N7f2"};

void BM_SweepSerial(benchmark::State& state) {
  const auto s = load(kScenarios[state.range(0)]);
  state.SetLabel(s.id);
  for (auto _ : state) benchmark::DoNotOptimize(atx::cli::sweep_serial(s, 1, 64));
  state.SetItemsProcessed(state.iterations() * 64);
}

void BM_SweepParallel(benchmark::State& state) {
  const auto s = load(kScenarios[state.range(0)]);
  state.SetLabel(s.id);
  for (auto _ : state) benchmark::DoNotOptimize(atx::cli::sweep(s, 1, 64));
  state.SetItemsProcessed(state.iterations() * 64);
}

BENCHMARK(BM_SweepSerial)->DenseRange(0, 2)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SweepParallel)->DenseRange(0, 2)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
