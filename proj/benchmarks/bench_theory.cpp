#include <benchmark/benchmark.h>

#include "critbatch/schedules.hpp"
#include "critbatch/theory.hpp"

namespace {

using namespace critbatch;

void BM_iterations_needed_decay(benchmark::State& state) {
  const TheoryConstants c = theory_constants_raw(1.5, 1.0, 2.0, 1.0, 8);
  const ScheduleSpec s = decay_schedule(1.0, Rational::of(3, 4), 8);
  double b = 2.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(iterations_needed(c, s, 0.2, b));
    b = b < 1e6 ? b * 1.001 : 2.0;
  }
}
BENCHMARK(BM_iterations_needed_decay);

void BM_n_derivatives_decay2(benchmark::State& state) {
  const TheoryConstants c = theory_constants_raw(1.5, 1.0, 2.0, 1.0, 8);
  const ScheduleSpec s = decay_schedule(1.0, Rational::of(1, 2), 8);
  const double pole = batch_domain_pole(c, s, 0.2);
  double b = pole * 1.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(n_derivatives(c, s, 0.2, b));
    b = b < pole * 100 ? b * 1.001 : pole * 1.01;
  }
}
BENCHMARK(BM_n_derivatives_decay2);

void BM_sum_squared_rates(benchmark::State& state) {
  const ScheduleSpec s = decay_schedule(0.5, Rational::of(1, 4), 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sum_squared_rates(s, state.range(0)));
  }
}
BENCHMARK(BM_sum_squared_rates)->Arg(1000)->Arg(100000);

}  // namespace
