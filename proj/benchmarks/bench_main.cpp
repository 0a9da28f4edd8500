#include <benchmark/benchmark.h>

#include "trustya/formulas.hpp"
#include "trustya/metrics.hpp"
#include "trustya/sim.hpp"

namespace {

using namespace trustya;

void BM_Payout(benchmark::State& state) {
  GameConfig c;
  Coins i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(payout(i, 25, c));
    i = (i + 1) & 63;
  }
}
BENCHMARK(BM_Payout);

void BM_Penalty(benchmark::State& state) {
  Coins s = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(penalty(s, 20, 12, 50));
    s = (s + 37) % 100000;
  }
}
BENCHMARK(BM_Penalty);

void BM_Gini(benchmark::State& state) {
  std::vector<Coins> x(static_cast<std::size_t>(state.range(0)));
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = static_cast<Coins>((k * 7919) % 10007);
  for (auto _ : state) benchmark::DoNotOptimize(metrics::gini(x));
}
BENCHMARK(BM_Gini)->Arg(10)->Arg(1000);

// One complete all-bot game, engine and policies included.
void BM_FullGame(benchmark::State& state) {
  const auto kind = agents::kAllBotKinds[static_cast<std::size_t>(state.range(0))];
  std::uint64_t seed = 1;
  for (auto _ : state) {
    GameConfig c;
    c.seed = seed++;
    auto run = sim::run_game(c, std::vector<agents::BotKind>(10, kind));
    benchmark::DoNotOptimize(run.summary.gini);
  }
  state.SetLabel(std::string(agents::to_string(kind)));
}
BENCHMARK(BM_FullGame)->DenseRange(0, 8)->Unit(benchmark::kMillisecond);

void BM_Replay(benchmark::State& state) {
  GameConfig c;
  c.seed = 3;
  const auto run = sim::run_game(c, std::vector<agents::BotKind>(10, agents::BotKind::SmarterRandom));
  ParsedLog log;
  log.events = run.log.events();
  log.lines = run.log.lines();
  for (auto _ : state) benchmark::DoNotOptimize(sim::replay(log).events);
}
BENCHMARK(BM_Replay)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
