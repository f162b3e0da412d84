#include <benchmark/benchmark.h>

#include "boa/model.hpp"
#include "boa/rng.hpp"

namespace {

std::vector<boa::ConfusionCounts> draws(std::size_t n, std::size_t max_count) {
  boa::Rng rng(1);
  std::vector<boa::ConfusionCounts> out(n);
  for (auto& c : out) c = {rng.below(max_count), rng.below(max_count), rng.below(max_count), rng.below(max_count)};
  return out;
}

void BM_LogLikelihood(benchmark::State& state) {
  const auto cs = draws(1024, 2000);
  const boa::LikelihoodHyper h;
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(boa::log_likelihood(cs[i++ & 1023], h));
}
BENCHMARK(BM_LogLikelihood);

void BM_LikelihoodTable(benchmark::State& state) {
  const auto cs = draws(1024, 2000);
  const boa::LikelihoodTable table(boa::LikelihoodHyper{}, 8000);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(table(cs[i++ & 1023]));
}
BENCHMARK(BM_LikelihoodTable);

void BM_LikelihoodTableBuild(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(boa::LikelihoodTable(boa::LikelihoodHyper{}, state.range(0)));
}
BENCHMARK(BM_LikelihoodTableBuild)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
