#include <benchmark/benchmark.h>

#include <vector>

#include "critbatch/engine.hpp"
#include "critbatch/problems.hpp"

namespace {

using namespace critbatch;

const ProblemSpec& desk_problem() {
  static const ProblemSpec p = [] {
    std::vector<double> spectrum(20);
    for (int j = 0; j < 20; ++j) spectrum[j] = 0.05 + 0.05 * j;
    return make_quadratic_sine(1, 1000, 20, spectrum, 0.0);
  }();
  return p;
}

void BM_minibatch_finite_sum(benchmark::State& state) {
  const ProblemSpec& p = desk_problem();
  const int b = static_cast<int>(state.range(0));
  std::vector<double> out(p.d);
  std::uint64_t step = 0;
  for (auto _ : state) {
    minibatch_gradient(p, OracleMode::FiniteSum, p.theta0, b, SampleStream{7, 0, step++}, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * b);
}
BENCHMARK(BM_minibatch_finite_sum)->Arg(1)->Arg(16)->Arg(256);

void BM_minibatch_additive(benchmark::State& state) {
  const ProblemSpec& p = desk_problem();
  const int b = static_cast<int>(state.range(0));
  std::vector<double> out(p.d);
  std::uint64_t step = 0;
  for (auto _ : state) {
    minibatch_gradient(p, OracleMode::AdditiveNoise, p.theta0, b, SampleStream{7, 0, step++},
                       out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_minibatch_additive)->Arg(1)->Arg(256);

void BM_run_sgd_1000_steps(benchmark::State& state) {
  const ProblemSpec& p = desk_problem();
  const ScheduleSpec s = decay_schedule(1.0, Rational::of(1, 2), 10);
  std::uint64_t trial = 0;
  for (auto _ : state) {
    const RunRecord rec = run_sgd(p, OracleMode::AdditiveNoise, s, 16, 1000, 3, trial++);
    benchmark::DoNotOptimize(rec.grad_norm_sq.data());
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_run_sgd_1000_steps);

}  // namespace
