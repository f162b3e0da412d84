#include <cmath>

#include <boost/multiprecision/cpp_int.hpp>

#include "doctest.h"

#include "boa/errors.hpp"
#include "boa/model.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace boa;
namespace mp = boost::multiprecision;
using testing::big;
using testing::oracle_log_likelihood;
using testing::quadrature_likelihood;
using testing::random_hyper;

namespace {

// Beta function of positive integers as an exact rational.
mp::cpp_rational exact_beta(unsigned a, unsigned b) {
  mp::cpp_int num = 1, den = 1;
  for (unsigned i = 2; i < a; ++i) num *= i;
  for (unsigned i = 2; i < b; ++i) num *= i;
  for (unsigned i = 2; i < a + b; ++i) den *= i;
  return mp::cpp_rational(num, den);
}

double log_of(const mp::cpp_rational& r) {
  return static_cast<double>(mp::log(big(mp::numerator(r)) / big(mp::denominator(r))));
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("likelihood closed-form examples") {
  const LikelihoodHyper ones{1, 1, 1, 1};
  CHECK(log_likelihood({1, 0, 1, 0}, ones) == doctest::Approx(std::log(0.25)).epsilon(1e-14));
  // Empty model on three negatives: 1 / (N + 1).
  CHECK(log_likelihood({0, 0, 3, 0}, ones) == doctest::Approx(std::log(0.25)).epsilon(1e-14));
  CHECK(log_likelihood({0, 0, 0, 0}, LikelihoodHyper{}) == 0.0);
}

TEST_CASE("likelihood matches a 50-digit lgamma oracle") {
  Rng rng(71);
  double worst = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const ConfusionCounts c{rng.below(3000), rng.below(3000), rng.below(3000), rng.below(3000)};
    const LikelihoodHyper h = random_hyper(rng, 0.5, 1000.0);
    const double ref = oracle_log_likelihood(c, h);
    if (ref == 0.0) continue;
    worst = std::max(worst, std::abs(log_likelihood(c, h) - ref) / std::abs(ref));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("likelihood equals the integral over rho+ and rho-") {
  Rng rng(73);
  for (int i = 0; i < 10; ++i) {
    const ConfusionCounts c{rng.below(5), rng.below(5), rng.below(5), rng.below(5)};
    const LikelihoodHyper h = random_hyper(rng, 1.0, 6.0);
    CHECK(std::abs(std::exp(log_likelihood(c, h)) - quadrature_likelihood(c, h)) < 1e-6);
  }
}

TEST_CASE("table lookup gives the same doubles") {
  Rng rng(79);
  const LikelihoodHyper h{100, 1, 1, 100};
  const LikelihoodTable table(h, 500);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t tp = rng.below(200), fp = rng.below(200), tn = rng.below(200), fn = rng.below(200);
    CHECK(table(tp, fp, tn, fn) == log_likelihood({tp, fp, tn, fn}, h));
  }
}

TEST_CASE("hyperparameter validation") {
  CHECK_THROWS_AS(LikelihoodHyper({0, 1, 1, 1}).validate(), ConfigError);
  CHECK_THROWS_AS(LikelihoodHyper({1, NAN, 1, 1}).validate(), ConfigError);
  CHECK_THROWS_AS(LikelihoodHyper({1, 1, INFINITY, 1}).validate(), ConfigError);
  CHECK_THROWS_AS(PoissonHyper({-1, 1, {}}).validate(), ConfigError);
  CHECK_THROWS_AS(parse_prior_kind("uniform"), ConfigError);
  CHECK(parse_prior_kind("poisson") == PriorKind::kPoisson);
}

TEST_CASE("Beta-Binomial prior examples") {
  BetaBinomialHyper one_length{{1.0}, {1.0}, {2}};
  CHECK(log_prior_betabinomial_counts(std::vector<std::size_t>{0}, one_length) ==
        doctest::Approx(std::log(1.0 / 3.0)).epsilon(1e-14));
  BetaBinomialHyper empty_pools = BetaBinomialHyper::defaults({0, 0, 0});
  CHECK(log_prior_betabinomial_counts(std::vector<std::size_t>{0, 0, 0}, empty_pools) == 0.0);
  CHECK_THROWS_AS(log_prior_betabinomial_counts(std::vector<std::size_t>{3}, one_length), ModelError);
  CHECK_THROWS_AS(log_prior_betabinomial_counts(std::vector<std::size_t>{0, 0}, one_length), ModelError);
  const auto d = BetaBinomialHyper::defaults({4, 0, 7});
  CHECK(d.alpha == std::vector<double>{1, 1, 1});
  CHECK(d.beta == std::vector<double>{4, 1, 7});
}

TEST_CASE("Beta-Binomial prior equals the exact rational pmf product") {
  Rng rng(83);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t L = 1 + rng.below(3);
    BetaBinomialHyper h;
    std::vector<std::size_t> counts;
    mp::cpp_rational prob = 1;
    for (std::size_t l = 0; l < L; ++l) {
      const unsigned pool = static_cast<unsigned>(rng.below(7));
      const unsigned a = 1 + static_cast<unsigned>(rng.below(5));
      const unsigned b = 1 + static_cast<unsigned>(rng.below(30));
      const unsigned m = static_cast<unsigned>(rng.below(pool + 1));
      h.pool_sizes.push_back(pool);
      h.alpha.push_back(a);
      h.beta.push_back(b);
      counts.push_back(m);
      prob *= exact_beta(m + a, pool - m + b) / exact_beta(a, b);
    }
    CHECK(log_prior_betabinomial_counts(counts, h) == doctest::Approx(log_of(prob)).epsilon(1e-12));
  }
}

TEST_CASE("Beta-Binomial prior depends only on counts per length and checks pool membership") {
  Rng rng(89);
  const Schema s = testing::random_schema(rng, 4, 3);
  const DatasetIndex idx = build_index(testing::random_table(s, 30, rng));
  const auto cands = testing::distinct_patterns(idx, 12, 2, rng, false);
  const MinedPool pool = make_pool(cands, idx, 2);
  const auto h = BetaBinomialHyper::defaults(pool.pool_sizes());
  for (int k = 0; k < 100; ++k) {
    const PatternSet a = testing::random_set(cands, rng);
    std::vector<std::size_t> counts(2, 0);
    for (const auto& p : a.patterns()) ++counts[p.length() - 1];
    CHECK(log_prior_betabinomial(a, h, &pool) == log_prior_betabinomial_counts(counts, h));
  }
  const Pattern outside = testing::random_pattern(idx, 2, rng);
  if (!pool.contains(outside)) {
    CHECK_THROWS_AS(log_prior_betabinomial(PatternSet({outside}), h, &pool), ModelError);
  }
}

TEST_CASE("Poisson prior examples") {
  const PoissonHyper h3{3.0, 1.0, {2, 3}};
  CHECK(log_prior_poisson(PatternSet{}, h3) == doctest::Approx(-3.0).epsilon(1e-14));

  const Schema s = parse_schema(R"({"attributes": [
      {"name": "a", "levels": ["p", "q"]}, {"name": "b", "levels": ["u", "v", "w"]}], "label_column": "y"})");
  const DatasetIndex idx = build_index(parse_csv("a,b,y\np,u,1\nq,v,0\n", s));
  const PoissonHyper h{1.0, 1.0, {2, 3}};
  const PatternSet one({Pattern::make({{0, TestKind::kEq, 0}}, idx)});
  CHECK(log_prior_poisson(one, h) == doctest::Approx(-2.0 - std::log(4.0)).epsilon(1e-14));
}

TEST_CASE("Poisson prior factorizes and ignores order") {
  Rng rng(97);
  const Schema s = testing::random_schema(rng, 5, 4);
  const DatasetIndex idx = build_index(testing::random_table(s, 20, rng));
  const PoissonHyper h = PoissonHyper::for_schema(s, 3.0, 2.0);
  const auto cands = testing::distinct_patterns(idx, 10, 3, rng, true);
  for (int k = 0; k < 100; ++k) {
    const PatternSet set = testing::random_set(cands, rng, 0.5);
    if (set.empty()) continue;
    const Pattern& drop = set[rng.below(set.size())];
    PatternSet smaller = set;
    smaller.erase(drop);
    const double diff = log_prior_poisson(set, h) - log_prior_poisson(smaller, h);
    const double expected = poisson_pattern_term(drop, h) + log_poisson_pmf(set.size(), h.lambda_m) -
                            log_poisson_pmf(smaller.size(), h.lambda_m);
    CHECK(diff == doctest::Approx(expected).epsilon(1e-12));

    std::vector<Pattern> reversed(set.patterns().rbegin(), set.patterns().rend());
    CHECK(log_prior_poisson(PatternSet(reversed), h) == log_prior_poisson(set, h));
  }
}

TEST_CASE("two thresholds on one attribute count it once in the attribute choice") {
  const PoissonHyper h{3.0, 2.0, {4, 5, 6}};
  const std::vector<Literal> interval{{1, TestKind::kGeq, 1}, {1, TestKind::kLeq, 3}};
  const double expected = log_poisson_pmf(2, 2.0) - std::log(3.0) - 2 * std::log(5.0);
  CHECK(poisson_pattern_term(interval, h) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("score composition and sign convention") {
  Rng rng(101);
  const Schema s = testing::random_schema(rng, 4, 3);
  const DatasetIndex idx = build_index(testing::random_table(s, 40, rng));
  const auto cands = testing::distinct_patterns(idx, 8, 2, rng, true);
  const MinedPool pool = make_pool(cands, idx, 2);
  for (PriorKind prior : {PriorKind::kBetaBinomial, PriorKind::kPoisson, PriorKind::kFlat}) {
    ModelParams params;
    params.prior = prior;
    params.betabinomial = BetaBinomialHyper::defaults(pool.pool_sizes());
    params.poisson = PoissonHyper::for_schema(s, 3, 2);
    const Score empty = score(PatternSet{}, idx, params);
    CHECK(empty.confusion == ConfusionCounts{0, 0, idx.num_negative(), idx.num_positive()});
    for (int k = 0; k < 20; ++k) {
      const PatternSet set = testing::random_set(cands, rng);
      const Score sc = score(set, idx, params, &pool);
      CHECK(sc.log_joint == sc.log_prior + sc.log_likelihood);
      CHECK(sc.energy() == -sc.log_joint);
      CHECK(sc.log_likelihood == log_likelihood(confusion(set, idx), params.likelihood));
    }
  }
}

TEST_CASE("identical predictions give identical likelihoods") {
  const Schema s = parse_schema(R"({"attributes": [
      {"name": "a", "levels": ["p", "q"]}, {"name": "b", "kind": "ordinal", "levels": ["1", "2"]}],
      "label_column": "y"})");
  const DatasetIndex idx = build_index(parse_csv("a,b,y\np,1,1\np,2,1\nq,1,0\nq,2,0\np,1,0\n", s));
  const PatternSet one({Pattern::make({{0, TestKind::kEq, 0}}, idx)});
  const PatternSet two({Pattern::make({{0, TestKind::kEq, 0}, {1, TestKind::kGeq, 0}}, idx)});
  REQUIRE(classify(one, idx) == classify(two, idx));
  ModelParams params;
  params.prior = PriorKind::kFlat;
  CHECK(score(one, idx, params).log_likelihood == score(two, idx, params).log_likelihood);
}

TEST_CASE("the perfect set beats the empty set on separable data") {
  const Schema s = parse_schema(R"({"attributes": [
      {"name": "a", "levels": ["p", "q", "r"]}, {"name": "b", "levels": ["u", "v"]}], "label_column": "y"})");
  std::string csv = "a,b,y\n";
  for (int rep = 0; rep < 5; ++rep) csv += "p,u,1\np,v,1\nq,u,0\nq,v,0\nr,u,0\nr,v,0\n";
  const DatasetIndex idx = build_index(parse_csv(csv, s));
  ModelParams params;
  params.prior = PriorKind::kPoisson;
  params.likelihood = {1, 1, 1, 1};
  params.poisson = PoissonHyper::for_schema(s, 3, 2);
  const PatternSet perfect({Pattern::make({{0, TestKind::kEq, 0}}, idx)});
  CHECK(score(perfect, idx, params).energy() < score(PatternSet{}, idx, params).energy());
  // The best set over all subsets of single literals is the perfect one.
  double best = INFINITY;
  PatternSet best_set;
  const std::size_t u = idx.universe().size();
  for (std::size_t mask = 0; mask < (std::size_t{1} << u); ++mask) {
    std::vector<Pattern> ps;
    for (std::size_t i = 0; i < u; ++i) {
      if (mask >> i & 1U) ps.push_back(Pattern::from_ids(std::span(&i, 1), idx));
    }
    const PatternSet set(std::move(ps));
    const double e = score(set, idx, params).energy();
    if (e < best) {
      best = e;
      best_set = set;
    }
  }
  CHECK(best_set == perfect);
}

TEST_CASE("scores stay finite across random inputs") {
  Rng rng(103);
  int bad = 0;
  for (int i = 0; i < 10000; ++i) {
    const ConfusionCounts c{rng.below(100000), rng.below(100000), rng.below(100000), rng.below(100000)};
    const LikelihoodHyper h = random_hyper(rng, 1e-3, 1e4);
    std::vector<std::size_t> counts;
    BetaBinomialHyper bb;
    for (int l = 0; l < 3; ++l) {
      const std::size_t pool = rng.below(100000);
      bb.pool_sizes.push_back(pool);
      bb.alpha.push_back(0.01 + rng.uniform() * 100);
      bb.beta.push_back(0.01 + rng.uniform() * 1e5);
      counts.push_back(rng.below(pool + 1));
    }
    const double ll = log_likelihood(c, h);
    const double lp = log_prior_betabinomial_counts(counts, bb);
    const double pp = log_poisson_pmf(rng.below(1000), 0.01 + rng.uniform() * 100);
    bad += !std::isfinite(ll) || !std::isfinite(lp) || !std::isfinite(pp);
  }
  CHECK(bad == 0);
}

}  // TEST_SUITE
