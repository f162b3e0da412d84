#include <cmath>

#include "doctest.h"

#include "boa/errors.hpp"
#include "boa/eval.hpp"
#include "support.hpp"

using namespace boa;

namespace {

// Upper envelope through (0,0) and (1,1), written independently of auc().
double envelope_area(std::vector<std::pair<double, double>> pts) {
  pts.emplace_back(0.0, 0.0);
  pts.emplace_back(1.0, 1.0);
  std::sort(pts.begin(), pts.end());
  // Best tpr reachable at or below each fpr.
  std::vector<std::pair<double, double>> env;
  for (const auto& p : pts) {
    double best = p.second;
    for (const auto& q : pts) {
      if (q.first <= p.first) best = std::max(best, q.second);
    }
    if (env.empty() || best > env.back().second) env.emplace_back(p.first, best);
  }
  env.emplace_back(1.0, env.back().second);
  double area = 0.0;
  for (std::size_t i = 1; i < env.size(); ++i) {
    area += (env[i].first - env[i - 1].first) * 0.5 * (env[i].second + env[i - 1].second);
  }
  return area;
}

std::vector<RocPoint> as_points(const std::vector<std::pair<double, double>>& pts) {
  std::vector<RocPoint> out;
  for (const auto& [f, t] : pts) out.push_back(RocPoint{f, t, {}});
  return out;
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("AUC anchors") {
  CHECK(auc(as_points({})) == doctest::Approx(0.5));
  CHECK(auc(as_points({{0.0, 0.0}, {1.0, 1.0}})) == doctest::Approx(0.5));
  CHECK(auc(as_points({{0.0, 1.0}})) == doctest::Approx(1.0));
  CHECK(auc(as_points({{0.5, 0.5}})) == doctest::Approx(0.5));
  CHECK(auc(as_points({{0.2, 0.6}})) == doctest::Approx(0.2 * 0.3 + 0.8 * 0.8));
  CHECK_THROWS_AS(auc(as_points({{1.2, 0.5}})), ConfigError);
}

TEST_CASE("AUC equals the envelope oracle and ignores dominated points") {
  Rng rng(179);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::pair<double, double>> pts;
    const std::size_t n = rng.below(8);
    for (std::size_t i = 0; i < n; ++i) pts.emplace_back(rng.below(11) / 10.0, rng.below(11) / 10.0);
    const double a = auc(as_points(pts));
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
    CHECK(a == doctest::Approx(envelope_area(pts)).epsilon(1e-12));
    if (!pts.empty()) {
      const auto [f, t] = pts[rng.below(pts.size())];
      auto more = pts;
      more.emplace_back(std::min(1.0, f + 0.05), std::max(0.0, t - 0.05));
      CHECK(auc(as_points(more)) == doctest::Approx(a).epsilon(1e-12));
    }
  }
}

TEST_CASE("default hyperparameter grid") {
  const auto grid = default_hyper_grid();
  CHECK(grid.size() == 16);
  for (const auto& h : grid) {
    CHECK(h.beta_pos == 1.0);
    CHECK(h.alpha_neg == 1.0);
  }
}

TEST_CASE("fixed-set metrics") {
  Rng rng(181);
  const Schema s = testing::random_schema(rng, 4, 3);
  const Table t = testing::random_table(s, 80, rng);
  const DatasetIndex idx = build_index(t);
  const Metrics empty = evaluate_fixed(PatternSet{}, idx);
  CHECK(empty.accuracy == doctest::Approx(double(idx.num_negative()) / idx.num_records()));
  CHECK(empty.tpr == 0.0);
  CHECK(empty.fpr == 0.0);

  const auto cands = testing::distinct_patterns(idx, 8, 2, rng, false);
  for (int k = 0; k < 20; ++k) {
    const PatternSet set = testing::random_set(cands, rng);
    const Metrics m = evaluate_fixed(set, idx);
    const Bitset pred = classify(set, idx);
    double tp = 0, fp = 0;
    for (std::size_t r = 0; r < t.num_records(); ++r) {
      tp += pred.test(r) && t.labels[r];
      fp += pred.test(r) && !t.labels[r];
    }
    CHECK(m.tpr == doctest::Approx(tp / idx.num_positive()));
    CHECK(m.fpr == doctest::Approx(fp / idx.num_negative()));
    CHECK(m.confusion == confusion(set, idx));
    // Flipping every prediction swaps tpr with the miss rate and fpr with the specificity.
    const Metrics flipped = metrics_from(confusion_from_prediction(~pred, idx));
    CHECK(flipped.tpr == doctest::Approx(1.0 - m.tpr));
    CHECK(flipped.fpr == doctest::Approx(1.0 - m.fpr));
  }
}

TEST_CASE("fixed sets are rebound to the evaluated data") {
  const Schema s = parse_schema(R"({"attributes": [{"name": "a", "levels": ["p", "q"]}], "label_column": "y"})");
  const DatasetIndex train = build_index(parse_csv("a,y\np,1\nq,0\n", s));
  const DatasetIndex test = build_index(parse_csv("a,y\nq,0\nq,1\np,1\np,0\n", s));
  const PatternSet set({Pattern::make({{0, TestKind::kEq, 0}}, train)});
  const Metrics m = evaluate_fixed(set, test);
  CHECK(m.confusion == ConfusionCounts{1, 1, 1, 1});
}

TEST_CASE("planted instances") {
  SimSpec spec;
  spec.records = 10;
  spec.candidates = 6;
  spec.planted = 2;
  spec.density = 0.3;
  Rng rng(191);
  const PlantedInstance inst = generate_planted(spec, rng);
  CHECK(inst.truth.size() == 2);
  CHECK(inst.pool.size() == 6);
  for (std::size_t r = 0; r < 10; ++r) {
    bool y = false;
    for (const auto& p : inst.truth.patterns()) y = y || inst.index.coverage(*inst.index.literal_id(p.literals()[0])).test(r);
    CHECK(inst.index.labels().test(r) == y);
  }

  spec.density = 1.0;
  Rng r2(1);
  CHECK(generate_planted(spec, r2).index.num_positive() == 10);
  spec.density = 0.3;
  spec.planted = 0;
  Rng r3(1);
  CHECK(generate_planted(spec, r3).index.num_positive() == 0);

  spec.planted = 7;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.planted = 2;
  spec.density = 0.0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("planted label rate") {
  SimSpec spec;
  spec.records = 20000;
  spec.candidates = 10;
  spec.planted = 3;
  spec.density = 0.1;
  Rng rng(193);
  const PlantedInstance inst = generate_planted(spec, rng);
  const double p = 1.0 - std::pow(0.9, 3);
  const double sd = std::sqrt(p * (1 - p) / spec.records);
  CHECK(std::abs(double(inst.index.num_positive()) / spec.records - p) < 4 * sd);
}

TEST_CASE("simulation study is reproducible") {
  SimSpec spec;
  spec.records = 300;
  spec.candidates = 40;
  spec.planted = 3;
  spec.checkpoints = {0, 200, 1000};
  spec.replicates = 4;
  spec.seed = 5;
  SAConfig sa;
  const SimulationResult a = simulation_study(spec, sa, {}, 1);
  const SimulationResult b = simulation_study(spec, sa, {}, 2);
  REQUIRE(a.rows.size() == 12);
  REQUIRE(a.summary.size() == 3);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].replicate == b.rows[i].replicate);
    CHECK(a.rows[i].edit_distance == b.rows[i].edit_distance);
    CHECK(a.rows[i].energy == b.rows[i].energy);
  }
  for (std::size_t k = 1; k < a.summary.size(); ++k) {
    CHECK(a.summary[k].mean_edit_distance <= a.summary[k - 1].mean_edit_distance);
  }
  const auto runtime = runtime_report(a);
  REQUIRE(runtime.size() == 3);
  for (std::size_t k = 1; k < runtime.size(); ++k) CHECK(runtime[k].seconds >= runtime[k - 1].seconds);
  CHECK(runtime[0].seconds < 0.5);
}

TEST_CASE("k-fold AUC on a clean rule") {
  Rng rng(197);
  const Schema s = testing::random_schema(rng, 4, 3, false);
  const Table t = testing::rule_table(s, 200, rng, 0.0);
  ModelConfig c;
  c.search.max_steps = 500;
  KFoldConfig kf;
  kf.k = 3;
  kf.grid = {LikelihoodHyper{}, LikelihoodHyper{1, 1, 1, 1}};
  kf.threads = 1;
  const KFoldResult r = kfold_auc(t, c, kf);
  CHECK(r.used_folds == 3);
  CHECK(r.folds[0].train_size + r.folds[0].test_size == 200);
  CHECK(r.mean_auc > 0.95);
  kf.threads = 2;
  CHECK(kfold_auc(t, c, kf).mean_auc == r.mean_auc);

  kf.k = 1;
  CHECK_THROWS_AS(kfold_auc(t, c, kf), ConfigError);
}

TEST_CASE("single-class folds are skipped") {
  const Schema s = parse_schema(R"({"attributes": [{"name": "a", "levels": ["p", "q"]}], "label_column": "y"})");
  const Table t = parse_csv("a,y\np,1\nq,0\nq,0\nq,0\np,0\nq,0\n", s);
  ModelConfig c;
  c.search.max_steps = 50;
  KFoldConfig kf;
  kf.k = 3;
  kf.grid = {LikelihoodHyper{}};
  const KFoldResult r = kfold_auc(t, c, kf);
  std::size_t skipped = 0;
  for (const auto& f : r.folds) {
    if (f.skipped) {
      ++skipped;
      CHECK_FALSE(f.note.empty());
    }
  }
  CHECK(skipped >= 2);
  CHECK(r.used_folds == 3 - skipped);
}

}  // TEST_SUITE
