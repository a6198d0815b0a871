#include <benchmark/benchmark.h>

#include <random>

#include "desapo/harness.hpp"
#include "desapo/scheduler.hpp"
#include "desapo/stats.hpp"

using namespace desapo;

static void BM_LogAppend(benchmark::State& state) {
  const std::size_t arms = static_cast<std::size_t>(state.range(0));
  const Round horizon = 100000;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (auto _ : state) {
    ProcessedLog log(arms, horizon);
    for (Round t = 1; t <= horizon; ++t) {
      log.append({t, static_cast<ArmIndex>(rng() % arms), unit(rng), 1.0 / arms, 0});
    }
    benchmark::DoNotOptimize(log.ucb_star());
  }
  state.SetItemsProcessed(state.iterations() * horizon);
}
BENCHMARK(BM_LogAppend)->Arg(2)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

static void BM_LedgerCycle(benchmark::State& state) {
  const Round horizon = 100000;
  const Round max_delay = state.range(0);
  std::mt19937_64 rng(2);
  for (auto _ : state) {
    DelayLedger ledger;
    std::size_t delivered = 0;
    for (Round t = 1; t <= horizon; ++t) {
      delivered += ledger.arrivals_at(t).size();
      const Round d = max_delay == 0 ? 0 : static_cast<Round>(rng() % (max_delay + 1));
      ledger.submit({t, 0, 0.5, 1.0, d});
    }
    benchmark::DoNotOptimize(delivered);
  }
  state.SetItemsProcessed(state.iterations() * horizon);
}
BENCHMARK(BM_LedgerCycle)->Arg(0)->Arg(100)->Arg(5000)->Unit(benchmark::kMillisecond);

static void BM_RunOnce(benchmark::State& state) {
  RunConfig c;
  c.num_arms = 5;
  c.horizon = 50000;
  c.loss = LossModel(BernoulliLosses{{0.1, 0.3, 0.5, 0.7, 0.9}});
  c.delay = DelayModel(FixedDelay{state.range(0)});
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto trace = run_once(c, ++seed, RunOptions{false});
    benchmark::DoNotOptimize(trace.pseudo_regret);
  }
  state.SetItemsProcessed(state.iterations() * c.horizon);
}
BENCHMARK(BM_RunOnce)->Arg(0)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
