#include <benchmark/benchmark.h>

#include <numbers>

#include "collideq/blp.hpp"
#include "collideq/collision.hpp"
#include "collideq/trajectories.hpp"

using namespace collideq;

namespace {

ModelConfig config(Setting s, double delta) {
  ModelConfig c;
  c.setting = s;
  c.beta = 1.0;
  c.dt = 0.1;
  c.delta = delta;
  return c;
}

Setting setting_of(const benchmark::State& state) { return state.range(0) == 1 ? Setting::I : Setting::II; }

void BM_EmbeddedChannel(benchmark::State& state) {
  const ModelConfig cfg = config(setting_of(state), 0.9);
  for (auto _ : state) benchmark::DoNotOptimize(embedded_step_channel(cfg));
}
BENCHMARK(BM_EmbeddedChannel)->Arg(1)->Arg(2);

void BM_SteadyState(benchmark::State& state) {
  const StepChannel ch = embedded_step_channel(config(setting_of(state), 0.9));
  for (auto _ : state) benchmark::DoNotOptimize(steady_state(ch));
}
BENCHMARK(BM_SteadyState)->Arg(1)->Arg(2);

void BM_Blp(benchmark::State& state) {
  const ModelConfig cfg = config(setting_of(state), 0.9 * std::numbers::pi / 2);
  for (auto _ : state) benchmark::DoNotOptimize(blp_measure(cfg, 500));
}
BENCHMARK(BM_Blp)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_Trajectory(benchmark::State& state) {
  const ModelConfig cfg = config(Setting::II, 0.95 * std::numbers::pi / 2);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_trajectory(cfg, ground_state(), 100, ++seed));
}
BENCHMARK(BM_Trajectory)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
