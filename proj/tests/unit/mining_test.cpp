#include <cmath>
#include <set>

#include "doctest.h"

#include "boa/errors.hpp"
#include "boa/mining.hpp"
#include "support.hpp"

using namespace boa;

namespace {

using LitVec = std::vector<Literal>;

// Every conjunction of <= max_len literals, no two sharing (attribute, test),
// with at least `threshold` positive records covered, scanned row by row.
std::set<LitVec> naive_frequent(const Table& t, const std::vector<Literal>& universe, std::size_t max_len,
                                std::size_t threshold) {
  std::set<LitVec> out;
  LitVec cur;
  auto rec = [&](auto&& self, std::size_t start) -> void {
    if (!cur.empty()) {
      std::size_t supp = 0;
      for (std::size_t r = 0; r < t.num_records(); ++r) {
        supp += t.labels[r] == 1 && testing::conjunction_holds(cur, t.cells[r]);
      }
      if (supp < threshold) return;  // anti-monotone: no superset can qualify
      out.insert(cur);
    }
    if (cur.size() == max_len) return;
    for (std::size_t i = start; i < universe.size(); ++i) {
      bool clash = false;
      for (const auto& l : cur) clash = clash || (l.attribute == universe[i].attribute && l.test == universe[i].test);
      if (clash) continue;
      cur.push_back(universe[i]);
      self(self, i + 1);
      cur.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

std::set<LitVec> literal_sets(const MinedPool& pool) {
  std::set<LitVec> out;
  for (const auto& mp : pool.patterns) out.emplace(mp.pattern.literals().begin(), mp.pattern.literals().end());
  return out;
}

double h2(double p) { return p <= 0.0 || p >= 1.0 ? 0.0 : -(p * std::log2(p) + (1 - p) * std::log2(1 - p)); }

double entropy_oracle(const Table& t, std::span<const Literal> lits) {
  double n = 0, nc = 0, pc = 0, pu = 0;
  for (std::size_t r = 0; r < t.num_records(); ++r) {
    const bool hit = testing::conjunction_holds(lits, t.cells[r]);
    n += 1;
    nc += hit;
    pc += hit && t.labels[r];
    pu += !hit && t.labels[r];
  }
  const double nu = n - nc;
  return (nc > 0 ? nc / n * h2(pc / nc) : 0.0) + (nu > 0 ? nu / n * h2(pu / nu) : 0.0);
}

MinedPattern fake(const DatasetIndex& idx, Literal lit, double tpr, double fpr) {
  MinedPattern mp = describe(Pattern::make({lit}, idx), idx);
  mp.tpr = tpr;
  mp.fpr = fpr;
  return mp;
}

}  // namespace

TEST_SUITE("mining") {

TEST_CASE("FP-growth equals naive enumeration") {
  Rng rng(41);
  for (int trial = 0; trial < 40; ++trial) {
    const Schema s = testing::random_schema(rng, 2 + rng.below(3), 3);
    const Table t = testing::random_table(s, 6 + rng.below(30), rng, 0.05);
    const DatasetIndex idx = build_index(t);
    MiningConfig cfg;
    cfg.max_length = 1 + rng.below(3);
    cfg.min_support_count = 1 + rng.below(3);
    const MinedPool pool = mine_frequent(idx, cfg);
    const std::vector<Literal> universe(idx.universe().begin(), idx.universe().end());
    CHECK(literal_sets(pool) == naive_frequent(t, universe, cfg.max_length, *cfg.min_support_count));
    for (const auto& mp : pool.patterns) {
      CHECK(mp.support_pos == support(mp.pattern, idx, SupportScope::kPositive));
      CHECK(mp.support_all == support(mp.pattern, idx));
      CHECK(mp.pattern.length() <= cfg.max_length);
    }
  }
}

TEST_CASE("six-record toy, length 2, threshold 2") {
  const Schema s = parse_schema(R"({"attributes": [
      {"name": "a", "kind": "categorical", "levels": ["p", "q"]},
      {"name": "b", "kind": "ordinal", "levels": ["1", "2", "3"]}],
    "label_column": "y", "positive_label": "1"})");
  const Table t = parse_csv("a,b,y\np,1,1\np,2,1\nq,3,1\np,3,1\nq,1,0\nq,2,0\n", s);
  const DatasetIndex idx = build_index(t);
  MiningConfig cfg;
  cfg.max_length = 2;
  cfg.min_support_count = 2;
  const MinedPool pool = mine_frequent(idx, cfg);
  const std::vector<Literal> universe(idx.universe().begin(), idx.universe().end());
  const auto expected = naive_frequent(t, universe, 2, 2);
  CHECK(literal_sets(pool) == expected);
  CHECK(pool.pool_sizes().size() == 2);
  // a = p holds on 3 of the 4 positives.
  CHECK(expected.count(LitVec{{0, TestKind::kEq, 0}}) == 1);
  CHECK(expected.count(LitVec{{0, TestKind::kEq, 0}, {1, TestKind::kGeq, 1}}) == 1);
}

TEST_CASE("full support threshold keeps only patterns covering every positive") {
  Rng rng(43);
  const Schema s = testing::random_schema(rng, 4, 3);
  const DatasetIndex idx = build_index(testing::random_table(s, 30, rng));
  MiningConfig cfg;
  cfg.min_support_fraction = 1.0;
  const MinedPool pool = mine_frequent(idx, cfg);
  for (const auto& mp : pool.patterns) CHECK(mp.support_pos == idx.num_positive());
}

TEST_CASE("raising the threshold gives a subset") {
  Rng rng(47);
  const Schema s = testing::random_schema(rng, 5, 4);
  const DatasetIndex idx = build_index(testing::random_table(s, 60, rng));
  MiningConfig lo, hi;
  lo.min_support_fraction = 0.1;
  hi.min_support_fraction = 0.3;
  const auto a = literal_sets(mine_frequent(idx, lo));
  const auto b = literal_sets(mine_frequent(idx, hi));
  CHECK(b.size() < a.size());
  for (const auto& p : b) CHECK(a.count(p) == 1);
}

TEST_CASE("mining errors and options") {
  const Schema s = parse_schema(R"({"attributes": [{"name": "a", "levels": ["p", "q"]}], "label_column": "y"})");
  const DatasetIndex negatives_only = build_index(parse_csv("a,y\np,0\nq,0\n", s));
  CHECK_THROWS_AS(mine_frequent(negatives_only, MiningConfig{}), DataError);
  MiningConfig bad;
  bad.min_support_fraction = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = MiningConfig{};
  bad.max_length = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  const DatasetIndex idx = build_index(parse_csv("a,y\np,1\nq,1\np,0\n", s));
  MiningConfig no_neg;
  no_neg.include_negative_literals = false;
  for (const auto& mp : mine_frequent(idx, no_neg).patterns) {
    for (const auto& l : mp.pattern.literals()) CHECK(l.test != TestKind::kNeq);
  }
  CHECK(MiningConfig{}.threshold(20) == 1);
  CHECK(MiningConfig{}.threshold(21) == 2);
}

TEST_CASE("ROC filter keeps the boundary") {
  const Schema s = parse_schema(R"({"attributes": [{"name": "a", "levels": ["p", "q", "r"]}], "label_column": "y"})");
  const DatasetIndex idx = build_index(parse_csv("a,y\np,1\nq,0\nr,1\n", s));
  MinedPool pool;
  pool.max_length = 1;
  pool.patterns = {fake(idx, {0, TestKind::kEq, 0}, 0.8, 0.1), fake(idx, {0, TestKind::kEq, 1}, 0.1, 0.4),
                   fake(idx, {0, TestKind::kEq, 2}, 0.3, 0.3)};
  const MinedPool kept = roc_filter(pool);
  REQUIRE(kept.size() == 2);
  CHECK(kept.patterns[0].tpr == 0.8);
  CHECK(kept.patterns[1].tpr == 0.3);
}

TEST_CASE("conditional entropy extremes") {
  const Schema s = parse_schema(R"({"attributes": [
      {"name": "a", "levels": ["p", "q"]}, {"name": "b", "levels": ["u", "v"]}], "label_column": "y"})");
  // a = p is exactly S+; b is independent of the label.
  const DatasetIndex idx = build_index(parse_csv("a,b,y\np,u,1\np,v,1\nq,u,0\nq,v,0\n", s));
  const Pattern pure = Pattern::make({{0, TestKind::kEq, 0}}, idx);
  const Pattern noise = Pattern::make({{1, TestKind::kEq, 0}}, idx);
  CHECK(conditional_entropy(pure.coverage(), idx) == doctest::Approx(0.0));
  CHECK(conditional_entropy(noise.coverage(), idx) == doctest::Approx(label_entropy(idx)));
  CHECK(label_entropy(idx) == doctest::Approx(1.0));
  const MinedPool screened = info_gain_screen(make_pool({noise, pure}, idx, 1), 1);
  REQUIRE(screened.size() == 1);
  CHECK(screened.patterns[0].pattern == pure);
}

TEST_CASE("screening keeps the lowest-entropy patterns") {
  Rng rng(53);
  for (int trial = 0; trial < 20; ++trial) {
    const Schema s = testing::random_schema(rng, 3, 3);
    const Table t = testing::random_table(s, 8 + rng.below(20), rng);
    const DatasetIndex idx = build_index(t);
    MiningConfig cfg;
    cfg.max_length = 2;
    cfg.min_support_count = 1;
    const MinedPool pool = mine_frequent(idx, cfg);
    for (const auto& mp : pool.patterns) {
      CHECK(mp.cond_entropy == doctest::Approx(entropy_oracle(t, mp.pattern.literals())).epsilon(1e-12));
    }
    const std::size_t k = 3;
    const MinedPool top = info_gain_screen(pool, k);
    CHECK(top.size() == std::min(k, pool.size()));
    double worst_kept = -1.0;
    const auto kept = literal_sets(top);
    for (const auto& mp : top.patterns) {
      CHECK(pool.contains(mp.pattern));
      worst_kept = std::max(worst_kept, entropy_oracle(t, mp.pattern.literals()));
    }
    for (const auto& mp : pool.patterns) {
      const LitVec lits(mp.pattern.literals().begin(), mp.pattern.literals().end());
      if (kept.count(lits) == 0) CHECK(entropy_oracle(t, lits) >= worst_kept - 1e-12);
    }
  }
}

TEST_CASE("pipeline is deterministic and pools round-trip through JSON") {
  Rng rng(59);
  const Schema s = testing::random_schema(rng, 6, 4);
  const DatasetIndex idx = build_index(testing::random_table(s, 150, rng));
  MiningConfig cfg;
  cfg.top_k = 40;
  const MinedPool a = mine_pool(idx, cfg);
  const MinedPool b = mine_pool(idx, cfg);
  CHECK(pool_to_json(a, s).dump() == pool_to_json(b, s).dump());
  for (const auto& mp : a.patterns) CHECK(mp.tpr >= mp.fpr);
  const MinedPool back = pool_from_json(pool_to_json(a, s), idx);
  CHECK(pool_to_json(back, s).dump() == pool_to_json(a, s).dump());

  auto doc = pool_to_json(a, s);
  doc["schema_fingerprint"] = "ffffffffffffffff";
  CHECK_THROWS_AS(pool_from_json(doc, idx), DataError);
  CHECK_THROWS_AS(pool_from_json(nlohmann::json::array(), idx), DataError);
}

TEST_CASE("support filter over all records") {
  Rng rng(61);
  const Schema s = testing::random_schema(rng, 4, 3);
  const DatasetIndex idx = build_index(testing::random_table(s, 50, rng));
  const MinedPool pool = mine_frequent(idx, MiningConfig{});
  const MinedPool f = filter_support_all(pool, 10);
  for (const auto& mp : f.patterns) CHECK(mp.support_all >= 10);
  std::size_t expected = 0;
  for (const auto& mp : pool.patterns) expected += mp.support_all >= 10;
  CHECK(f.size() == expected);
}

}  // TEST_SUITE
