#include "boa/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "boa/errors.hpp"
#include "boa/parallel.hpp"

namespace boa {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

// Sample mean and standard deviation (n - 1 denominator; 0 for n < 2).
std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

bool single_class(const DatasetIndex& index) { return index.num_positive() == 0 || index.num_negative() == 0; }

}  // namespace

double auc(std::span<const RocPoint> points) {
  std::vector<std::pair<double, double>> pts{{0.0, 0.0}, {1.0, 1.0}};
  for (const auto& p : points) {
    if (!(p.fpr >= 0.0 && p.fpr <= 1.0 && p.tpr >= 0.0 && p.tpr <= 1.0)) {
      throw ConfigError("auc: ROC coordinates must lie in [0, 1]");
    }
    pts.emplace_back(p.fpr, p.tpr);
  }
  // Ascending fpr, descending tpr within ties; keep each point whose tpr
  // beats every point at smaller or equal fpr.
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first : a.second > b.second;
  });
  std::vector<std::pair<double, double>> hull;
  for (const auto& p : pts) {
    if (!hull.empty() && p.second <= hull.back().second) continue;
    hull.push_back(p);
  }
  if (hull.back().first < 1.0) hull.emplace_back(1.0, hull.back().second);
  double area = 0.0;
  for (std::size_t i = 1; i < hull.size(); ++i) {
    area += (hull[i].first - hull[i - 1].first) * (hull[i].second + hull[i - 1].second) / 2.0;
  }
  return area;
}

std::vector<LikelihoodHyper> default_hyper_grid() {
  std::vector<LikelihoodHyper> grid;
  for (double ap : {1.0, 10.0, 100.0, 1000.0}) {
    for (double bn : {1.0, 10.0, 100.0, 1000.0}) grid.push_back(LikelihoodHyper{ap, 1.0, 1.0, bn});
  }
  return grid;
}

Metrics metrics_from(const ConfusionCounts& c) {
  Metrics m;
  m.confusion = c;
  m.accuracy = ratio(c.tp + c.tn, c.total());
  m.tpr = ratio(c.tp, c.positives());
  m.fpr = ratio(c.fp, c.negatives());
  return m;
}

Metrics evaluate_fixed(const PatternSet& set, const DatasetIndex& index) {
  return metrics_from(confusion(set.rebind(index), index));
}

void KFoldConfig::validate() const {
  if (k < 2) throw ConfigError("kfold: k must be >= 2");
  if (!(label_noise >= 0.0 && label_noise < 1.0)) throw ConfigError("kfold: label_noise must lie in [0, 1)");
  for (const auto& h : grid) h.validate();
}

KFoldResult kfold_auc(const Table& table, const ModelConfig& config, const KFoldConfig& kf) {
  kf.validate();
  config.validate();
  const std::size_t n = table.num_records();
  if (n < kf.k) throw DataError("kfold: fewer records than folds");
  const std::vector<LikelihoodHyper> grid = kf.grid.empty() ? default_hyper_grid() : kf.grid;
  const std::vector<Literal> universe = expand_literals(table.schema);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng split_rng(derive_seed(kf.seed, {stream::kSplit}));
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[split_rng.below(i)]);

  KFoldResult result;
  result.folds.resize(kf.k);
  std::vector<DatasetIndex> train(kf.k), test(kf.k);
  std::vector<MinedPool> pools(kf.k);
  for (std::size_t f = 0; f < kf.k; ++f) {
    auto& fold = result.folds[f];
    fold.fold = f;
    const std::size_t lo = f * n / kf.k;
    const std::size_t hi = (f + 1) * n / kf.k;
    std::vector<std::size_t> test_rows(order.begin() + static_cast<std::ptrdiff_t>(lo),
                                       order.begin() + static_cast<std::ptrdiff_t>(hi));
    std::vector<std::size_t> train_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(lo));
    train_rows.insert(train_rows.end(), order.begin() + static_cast<std::ptrdiff_t>(hi), order.end());
    std::sort(test_rows.begin(), test_rows.end());
    std::sort(train_rows.begin(), train_rows.end());

    Table train_table = table.select(train_rows);
    if (kf.label_noise > 0.0) {
      Rng noise(derive_seed(kf.seed, {stream::kNoise, f}));
      for (auto& y : train_table.labels) {
        if (noise.bernoulli(kf.label_noise)) y = static_cast<std::uint8_t>(1 - y);
      }
    }
    train[f] = build_index(train_table, universe);
    test[f] = build_index(table.select(test_rows), universe);
    fold.train_size = train_rows.size();
    fold.test_size = test_rows.size();
    if (single_class(train[f]) || single_class(test[f])) {
      fold.skipped = true;
      fold.note = single_class(train[f]) ? "training split holds a single class" : "test split holds a single class";
    }
    fold.points.resize(grid.size());
    fold.model_sizes.resize(grid.size());
  }

  const bool pattern_level = config.search.level == SearchLevel::kPattern;
  const std::size_t threads = kf.threads == 0 ? default_thread_count() : kf.threads;
  parallel_for(kf.k, threads, [&](std::size_t f) {
    if (!result.folds[f].skipped && pattern_level) pools[f] = mine_pool(train[f], config.mining);
  });
  parallel_for(kf.k * grid.size(), threads, [&](std::size_t task) {
    const std::size_t f = task / grid.size();
    const std::size_t g = task % grid.size();
    auto& fold = result.folds[f];
    if (fold.skipped) return;
    ModelConfig c = config;
    c.likelihood = grid[g];
    c.search.seed = derive_seed(kf.seed, {stream::kGrid, f, g});
    c.search.threads = 1;
    c.search.record_trace = false;
    c.search.checkpoints.clear();
    const FitResult fit = fit_with_pool(train[f], c, pools[f]);
    const Metrics m = evaluate_fixed(fit.search.best, test[f]);
    fold.points[g] = RocPoint{m.fpr, m.tpr, grid[g]};
    fold.model_sizes[g] = fit.search.best.size();
  });

  std::vector<double> aucs;
  for (auto& fold : result.folds) {
    if (fold.skipped) continue;
    fold.auc = auc(fold.points);
    aucs.push_back(fold.auc);
  }
  result.used_folds = aucs.size();
  std::tie(result.mean_auc, result.std_auc) = mean_std(aucs);
  return result;
}

void SimSpec::validate() const {
  if (records < 1) throw ConfigError("simulation: N must be >= 1");
  if (candidates < 1) throw ConfigError("simulation: M must be >= 1");
  if (planted > candidates) throw ConfigError("simulation: m must not exceed M");
  if (!(density > 0.0 && density <= 1.0)) throw ConfigError("simulation: density must lie in (0, 1]");
  if (replicates < 1) throw ConfigError("simulation: replicates must be >= 1");
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end())) {
    throw ConfigError("simulation: checkpoints must be ascending");
  }
}

PlantedInstance generate_planted(const SimSpec& spec, Rng& rng) {
  spec.validate();
  const std::size_t n = spec.records;
  const std::size_t m_cols = spec.candidates;

  Schema schema;
  schema.label_column = "y";
  schema.positive_label = "1";
  std::vector<Literal> universe;
  std::vector<Bitset> coverage;
  for (std::size_t j = 0; j < m_cols; ++j) {
    schema.attributes.push_back(AttributeSchema{"c" + std::to_string(j), AttributeKind::kCategorical, {"0", "1"}});
    universe.push_back(Literal{static_cast<std::uint32_t>(j), TestKind::kEq, 1});
    coverage.emplace_back(n);
  }
  // Row-major fill keeps the draw order independent of M's storage layout.
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < m_cols; ++j) {
      if (rng.bernoulli(spec.density)) coverage[j].set(r);
    }
  }
  std::vector<std::size_t> cols(m_cols);
  std::iota(cols.begin(), cols.end(), 0);
  for (std::size_t i = 0; i < spec.planted; ++i) std::swap(cols[i], cols[i + rng.below(m_cols - i)]);
  cols.resize(spec.planted);

  Bitset labels(n);
  for (std::size_t j : cols) labels |= coverage[j];

  PlantedInstance inst;
  inst.index = DatasetIndex(std::move(schema), std::move(universe), std::move(coverage), std::move(labels));
  std::vector<Pattern> singles;
  singles.reserve(m_cols);
  for (std::size_t j = 0; j < m_cols; ++j) singles.push_back(Pattern::from_ids(std::span(&j, 1), inst.index));
  std::vector<Pattern> truth;
  for (std::size_t j : cols) truth.push_back(singles[j]);
  inst.truth = PatternSet(std::move(truth));
  inst.pool = make_pool(std::move(singles), inst.index, 1);
  return inst;
}

SimulationResult simulation_study(const SimSpec& spec, SAConfig sa, const LikelihoodHyper& likelihood,
                                  std::size_t threads) {
  spec.validate();
  likelihood.validate();
  sa.checkpoints = spec.checkpoints;
  sa.max_steps = std::max<std::size_t>(1, spec.checkpoints.empty() ? sa.max_steps : spec.checkpoints.back());
  sa.level = SearchLevel::kPattern;
  sa.threads = 1;
  sa.record_trace = false;
  sa.validate();

  ModelParams params;
  params.prior = PriorKind::kFlat;
  params.likelihood = likelihood;

  std::vector<std::vector<SimulationRow>> per_rep(spec.replicates);
  parallel_for(spec.replicates, threads == 0 ? default_thread_count() : threads, [&](std::size_t r) {
    Rng rng(derive_seed(spec.seed, {stream::kReplicate, r, stream::kInstance}));
    const PlantedInstance inst = generate_planted(spec, rng);
    SAConfig local = sa;
    local.seed = derive_seed(spec.seed, {stream::kReplicate, r, stream::kChain});
    const SearchResult res = sa_search(inst.index, &inst.pool, params, local);
    for (const auto& cp : res.checkpoints) {
      per_rep[r].push_back(SimulationRow{r, cp.step, edit_distance(cp.best, inst.truth), cp.energy, cp.seconds});
    }
  });

  SimulationResult out;
  for (auto& rows : per_rep) out.rows.insert(out.rows.end(), rows.begin(), rows.end());
  for (std::size_t k = 0; k < spec.checkpoints.size(); ++k) {
    std::vector<double> dist, secs;
    for (const auto& rows : per_rep) {
      dist.push_back(static_cast<double>(rows[k].edit_distance));
      secs.push_back(rows[k].seconds);
    }
    SimulationSummary s;
    s.checkpoint = spec.checkpoints[k];
    std::tie(s.mean_edit_distance, s.std_edit_distance) = mean_std(dist);
    s.mean_seconds = mean_std(secs).first;
    out.summary.push_back(s);
  }
  return out;
}

std::vector<RuntimeRow> runtime_report(const SimulationResult& result) {
  std::vector<RuntimeRow> rows;
  for (const auto& s : result.summary) rows.push_back(RuntimeRow{s.checkpoint, s.mean_seconds, s.mean_edit_distance});
  return rows;
}

}  // namespace boa
