#include <benchmark/benchmark.h>

#include <exitwalk/philox.hpp>
#include <exitwalk/power_tails.hpp>
#include <exitwalk/special_functions.hpp>

namespace {

void BM_IncBeta(benchmark::State& state) {
  double x = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(exitwalk::inc_beta(0.75, 0.75, x));
    x += 1e-4;
    if (x > 0.9) x = 0.1;
  }
}
BENCHMARK(BM_IncBeta);

void BM_TailSum(benchmark::State& state) {
  const exitwalk::PowerLogWeight w{1.0 + state.range(0) / 10.0, 2.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(exitwalk::power_log_tail_sum(w, 1000));
  }
}
BENCHMARK(BM_TailSum)->Arg(6)->Arg(10);

void BM_PhiloxBlock(benchmark::State& state) {
  exitwalk::RngStream s(0x9e3779b97f4a7c15ull, 3);
  std::uint64_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(s.uniforms_at(i++));
  }
}
BENCHMARK(BM_PhiloxBlock);

} // namespace

BENCHMARK_MAIN();
