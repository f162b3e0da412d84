#include <benchmark/benchmark.h>

#include "boa/eval.hpp"
#include "boa/infer.hpp"

namespace {

// Annealing steps on a planted instance. Labels are inverted on a few rows
// so the chain cannot halt at zero error and every step runs.
void BM_PatternSteps(benchmark::State& state) {
  boa::SimSpec spec;
  spec.records = 2000;
  spec.candidates = static_cast<std::size_t>(state.range(0));
  boa::Rng rng(7);
  const boa::PlantedInstance inst = boa::generate_planted(spec, rng);
  boa::Bitset labels = inst.index.labels();
  for (std::size_t r = 0; r < labels.size(); r += 37) labels.set(r, !labels.test(r));
  std::vector<boa::Bitset> coverage;
  for (std::size_t i = 0; i < inst.index.universe().size(); ++i) coverage.push_back(inst.index.coverage(i));
  const boa::DatasetIndex index(inst.index.schema(),
                                std::vector<boa::Literal>(inst.index.universe().begin(), inst.index.universe().end()),
                                std::move(coverage), std::move(labels));
  std::vector<boa::Pattern> ps;
  for (const auto& mp : inst.pool.patterns) ps.push_back(mp.pattern.rebind(index));
  const boa::MinedPool pool = boa::make_pool(std::move(ps), index, 1);
  boa::ModelParams params;
  params.prior = boa::PriorKind::kFlat;
  boa::SAConfig sa;
  sa.max_steps = 1000;
  sa.restarts = 1;
  sa.threads = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(boa::sa_search(index, &pool, params, sa));
    ++sa.seed;
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(sa.max_steps));
}
BENCHMARK(BM_PatternSteps)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
