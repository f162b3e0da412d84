#include <benchmark/benchmark.h>

#include "boa/data.hpp"
#include "boa/mining.hpp"

namespace {

const boa::DatasetIndex& tictactoe() {
  static const boa::DatasetIndex index = [] {
    const boa::Schema schema = boa::load_schema(BOA_DATA_DIR "/tictactoe.schema.json");
    return boa::build_index(boa::load_csv(BOA_DATA_DIR "/tictactoe.csv", schema));
  }();
  return index;
}

void BM_MineFrequent(benchmark::State& state) {
  boa::MiningConfig c;
  c.max_length = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(boa::mine_frequent(tictactoe(), c));
}
BENCHMARK(BM_MineFrequent)->DenseRange(1, 3)->Unit(benchmark::kMillisecond);

void BM_MinePool(benchmark::State& state) {
  boa::MiningConfig c;
  c.top_k = 1000;
  for (auto _ : state) benchmark::DoNotOptimize(boa::mine_pool(tictactoe(), c));
}
BENCHMARK(BM_MinePool)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
