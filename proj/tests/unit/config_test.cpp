#include "doctest.h"

#include "boa/config.hpp"
#include "boa/errors.hpp"
#include "support.hpp"

using namespace boa;
using nlohmann::json;

TEST_SUITE("config") {

TEST_CASE("defaults") {
  const ModelConfig c;
  CHECK(c.prior == PriorKind::kBetaBinomial);
  CHECK(c.likelihood == LikelihoodHyper{100, 1, 1, 100});
  CHECK(c.search.max_steps == 50000);
  CHECK(c.search.restarts == 3);
  CHECK(c.search.explore_p == 0.1);
  CHECK(c.search.t0 == 1.0);
  CHECK(c.mining.min_support_fraction == 0.05);
  CHECK(c.mining.max_length == 3);
  CHECK_FALSE(c.mining.top_k.has_value());
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("JSON round trip") {
  ModelConfig c;
  c.prior = PriorKind::kPoisson;
  c.likelihood = {10, 2, 3, 40};
  c.bb_alpha = std::vector<double>{2.0};
  c.lambda_m = 5;
  c.mining.top_k = 100;
  c.mining.min_support_count = 4;
  c.search.level = SearchLevel::kLiteral;
  c.search.seed = 99;
  c.search.checkpoints = {10, 20};
  c.apply_support_bound = false;
  const ModelConfig back = model_config_from_json(to_json(c));
  CHECK(to_json(back).dump() == to_json(c).dump());
  CHECK(back.likelihood == c.likelihood);
  CHECK(*back.mining.top_k == 100);
}

TEST_CASE("partial documents override the base") {
  const ModelConfig c = model_config_from_json(json::parse(R"({"search": {"max_steps": 10}, "betabinomial": {"beta": 7}})"));
  CHECK(c.search.max_steps == 10);
  CHECK(c.search.restarts == 3);
  REQUIRE(c.bb_beta.has_value());
  CHECK(*c.bb_beta == std::vector<double>{7.0});
}

TEST_CASE("bad documents are config errors") {
  CHECK_THROWS_AS(model_config_from_json(json::parse(R"({"prior": "betabinomial", "extra": 1})")), ConfigError);
  CHECK_THROWS_AS(model_config_from_json(json::parse(R"({"search": {"steps": 10}})")), ConfigError);
  CHECK_THROWS_AS(model_config_from_json(json::parse(R"({"search": {"max_steps": "many"}})")), ConfigError);
  CHECK_THROWS_AS(model_config_from_json(json::parse(R"({"search": {"level": "rule"}})")), ConfigError);
  CHECK_THROWS_AS(model_config_from_json(json::parse(R"({"likelihood": {"alpha_pos": -1}})")), ConfigError);
  CHECK_THROWS_AS(model_config_from_json(json::parse(R"({"mining": {"min_support": 1.5}})")), ConfigError);
  CHECK_THROWS_AS(model_config_from_json(json::parse(R"({"betabinomial": {"alpha": []}})")), ConfigError);
  CHECK_THROWS_AS(model_config_from_json(json::parse("[1, 2]")), ConfigError);
  CHECK_THROWS_AS(load_model_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("parameter resolution") {
  Rng rng(167);
  const Schema s = testing::random_schema(rng, 4, 3);
  const DatasetIndex idx = build_index(testing::random_table(s, 60, rng));
  ModelConfig c;
  const MinedPool pool = mine_pool(idx, c.mining);
  const ModelParams p = resolve_params(c, idx, &pool);
  CHECK(p.betabinomial.pool_sizes == pool.pool_sizes());
  CHECK(p.poisson.levels.size() == 4);

  c.search.level = SearchLevel::kLiteral;
  const ModelParams lit = resolve_params(c, idx, nullptr);
  CHECK(lit.betabinomial.pool_sizes == count_conjunctions(idx.universe(), 3));

  c.bb_alpha = std::vector<double>{2.0};
  c.bb_beta = std::vector<double>{1.0, 2.0, 3.0};
  const ModelParams over = resolve_params(c, idx, nullptr);
  CHECK(over.betabinomial.alpha == std::vector<double>{2, 2, 2});
  CHECK(over.betabinomial.beta == std::vector<double>{1, 2, 3});
  c.bb_beta = std::vector<double>{1.0, 2.0};
  CHECK_THROWS_AS(resolve_params(c, idx, nullptr), ConfigError);
}

TEST_CASE("fit runs the whole pipeline") {
  Rng rng(173);
  const Schema s = testing::random_schema(rng, 5, 3);
  const DatasetIndex idx = build_index(testing::rule_table(s, 200, rng, 0.0));
  ModelConfig c;
  c.search.max_steps = 2000;
  c.search.seed = 3;
  const FitResult a = fit(idx, c);
  const FitResult b = fit(idx, c);
  CHECK(a.search.best == b.search.best);
  CHECK(a.pool.size() <= a.mined_size);
  for (const auto& mp : a.pool.patterns) CHECK(mp.support_all >= a.support_threshold);
  CHECK(a.bounds.log_likelihood_used == a.search.score.log_likelihood);
  CHECK(a.search.score.confusion.errors() <= idx.num_records() / 10);

  c.apply_support_bound = false;
  CHECK(fit(idx, c).pool.size() == a.mined_size);

  c.mining.min_support_fraction = 1.0;
  c.mining.max_length = 1;
  const FitResult empty_pool = fit(idx, c);
  if (empty_pool.pool.empty()) CHECK(empty_pool.search.best.empty());
}

}  // TEST_SUITE
