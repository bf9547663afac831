#include <benchmark/benchmark.h>

#include <random>

#include "ced/credal.hpp"
#include "ced/entropy_bounds.hpp"
#include "ced/heads.hpp"
#include "ced/mlp.hpp"

namespace {

using namespace ced;

std::vector<std::vector<double>> members(std::size_t m, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> g(1.0, 1.0);
  std::vector<std::vector<double>> out(m, std::vector<double>(c));
  for (auto& row : out) {
    double s = 0.0;
    for (double& v : row) s += v = g(rng);
    for (double& v : row) v /= s;
  }
  return out;
}

void BM_Wrap(benchmark::State& state) {
  const auto ens = members(static_cast<std::size_t>(state.range(0)), 10, 1);
  for (auto _ : state) {
    const IntervalSystem is = wrap_ensemble(ens);
    benchmark::DoNotOptimize(intersection_probability(is));
  }
}
BENCHMARK(BM_Wrap)->Arg(5)->Arg(10);

void BM_UpperEntropy(benchmark::State& state) {
  const IntervalSystem is = wrap_ensemble(members(5, static_cast<std::size_t>(state.range(0)), 2));
  for (auto _ : state) benchmark::DoNotOptimize(upper_entropy(is));
}
BENCHMARK(BM_UpperEntropy)->Arg(3)->Arg(10)->Arg(12);

void BM_LowerEntropy(benchmark::State& state) {
  const IntervalSystem is = wrap_ensemble(members(5, static_cast<std::size_t>(state.range(0)), 3));
  for (auto _ : state) benchmark::DoNotOptimize(lower_entropy(is));
}
BENCHMARK(BM_LowerEntropy)->Arg(3)->Arg(10)->Arg(12)->Unit(benchmark::kMicrosecond);

void BM_GridOracle(benchmark::State& state) {
  const IntervalSystem is = wrap_ensemble(members(5, 3, 4));
  for (auto _ : state) benchmark::DoNotOptimize(grid_oracle_entropy_bounds(is, 0.005));
}
BENCHMARK(BM_GridOracle)->Unit(benchmark::kMicrosecond);

void BM_CreditForward(benchmark::State& state) {
  std::vector<double> z(21, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(credit_forward(StudentLogits(z, 10, 2.5)));
}
BENCHMARK(BM_CreditForward);

void BM_MlpForward(benchmark::State& state) {
  MlpSpec s;
  s.output_dim = 7;
  const Mlp net(s);
  const Matrix x(static_cast<std::size_t>(state.range(0)), 2, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpForward)->Arg(64)->Arg(1500)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
