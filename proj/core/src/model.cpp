#include "boa/model.hpp"

#include <cmath>
#include <string>

#include "boa/errors.hpp"

namespace boa {

namespace {

void require_positive_finite(double v, const char* what) {
  if (!std::isfinite(v) || !(v > 0.0)) throw ConfigError(std::string(what) + " must be a positive finite number");
}

// Both sides of each Beta factor go through this one expression so the table
// path and the direct path produce the same rounding.
inline double beta_factor(double lg_a, double lg_b, double lg_sum, double lb0) { return lg_a + lg_b - lg_sum - lb0; }

}  // namespace

std::string_view to_string(PriorKind kind) {
  switch (kind) {
    case PriorKind::kBetaBinomial: return "betabinomial";
    case PriorKind::kPoisson: return "poisson";
    case PriorKind::kFlat: return "flat";
  }
  return "betabinomial";
}

PriorKind parse_prior_kind(std::string_view text) {
  if (text == "betabinomial" || text == "bb" || text == "boa1") return PriorKind::kBetaBinomial;
  if (text == "poisson" || text == "boa2") return PriorKind::kPoisson;
  if (text == "flat") return PriorKind::kFlat;
  throw ConfigError("unknown prior '" + std::string(text) + "' (expected betabinomial, poisson or flat)");
}

void LikelihoodHyper::validate() const {
  require_positive_finite(alpha_pos, "alpha_pos");
  require_positive_finite(beta_pos, "beta_pos");
  require_positive_finite(alpha_neg, "alpha_neg");
  require_positive_finite(beta_neg, "beta_neg");
}

void BetaBinomialHyper::validate() const {
  if (alpha.size() != pool_sizes.size() || beta.size() != pool_sizes.size()) {
    throw ConfigError("betabinomial: need one alpha and one beta per pattern length");
  }
  for (std::size_t l = 0; l < alpha.size(); ++l) {
    require_positive_finite(alpha[l], "betabinomial alpha");
    require_positive_finite(beta[l], "betabinomial beta");
  }
}

BetaBinomialHyper BetaBinomialHyper::defaults(std::vector<std::size_t> pool_sizes) {
  BetaBinomialHyper h;
  for (std::size_t size : pool_sizes) {
    h.alpha.push_back(1.0);
    h.beta.push_back(size == 0 ? 1.0 : static_cast<double>(size));
  }
  h.pool_sizes = std::move(pool_sizes);
  return h;
}

void PoissonHyper::validate() const {
  require_positive_finite(lambda_m, "lambda_m");
  require_positive_finite(lambda_l, "lambda_l");
}

PoissonHyper PoissonHyper::for_schema(const Schema& schema, double lambda_m, double lambda_l) {
  PoissonHyper h;
  h.lambda_m = lambda_m;
  h.lambda_l = lambda_l;
  for (const auto& a : schema.attributes) h.levels.push_back(a.levels.size());
  h.validate();
  return h;
}

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

double log_poisson_pmf(std::size_t k, double lambda) {
  const double kd = static_cast<double>(k);
  return -lambda + kd * std::log(lambda) - std::lgamma(kd + 1.0);
}

double log_binomial(double n, double k) {
  if (k < 0.0 || k > n) return -INFINITY;
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double log_likelihood(const ConfusionCounts& c, const LikelihoodHyper& h) {
  const double tp = static_cast<double>(c.tp);
  const double fp = static_cast<double>(c.fp);
  const double tn = static_cast<double>(c.tn);
  const double fn = static_cast<double>(c.fn);
  const double pos = beta_factor(std::lgamma(tp + h.alpha_pos), std::lgamma(fp + h.beta_pos),
                                 std::lgamma(static_cast<double>(c.tp + c.fp) + (h.alpha_pos + h.beta_pos)),
                                 log_beta(h.alpha_pos, h.beta_pos));
  const double neg = beta_factor(std::lgamma(tn + h.alpha_neg), std::lgamma(fn + h.beta_neg),
                                 std::lgamma(static_cast<double>(c.tn + c.fn) + (h.alpha_neg + h.beta_neg)),
                                 log_beta(h.alpha_neg, h.beta_neg));
  return pos + neg;
}

double log_prior_betabinomial_counts(std::span<const std::size_t> counts, const BetaBinomialHyper& h) {
  if (counts.size() > h.max_length()) throw ModelError("betabinomial: pattern longer than the pool range");
  double total = 0.0;
  for (std::size_t l = 0; l < h.max_length(); ++l) {
    const std::size_t m = l < counts.size() ? counts[l] : 0;
    const std::size_t pool = h.pool_sizes[l];
    if (m > pool) throw ModelError("betabinomial: more patterns of length " + std::to_string(l + 1) + " than the pool holds");
    total += log_beta(static_cast<double>(m) + h.alpha[l], static_cast<double>(pool - m) + h.beta[l]) -
             log_beta(h.alpha[l], h.beta[l]);
  }
  return total;
}

double log_prior_betabinomial(const PatternSet& set, const BetaBinomialHyper& h, const MinedPool* pool) {
  std::vector<std::size_t> counts(h.max_length(), 0);
  for (const auto& p : set.patterns()) {
    if (p.length() > h.max_length()) throw ModelError("betabinomial: pattern longer than the pool range");
    if (pool != nullptr && !pool->contains(p)) throw ModelError("betabinomial: pattern is not in the mined pool");
    ++counts[p.length() - 1];
  }
  return log_prior_betabinomial_counts(counts, h);
}

double poisson_pattern_term(std::span<const Literal> lits, const PoissonHyper& h) {
  std::size_t distinct = 0;
  double log_levels = 0.0;
  for (std::size_t i = 0; i < lits.size(); ++i) {
    if (i == 0 || lits[i].attribute != lits[i - 1].attribute) ++distinct;
    if (lits[i].attribute >= h.levels.size()) throw ModelError("poisson: literal attribute outside the schema");
    log_levels += std::log(static_cast<double>(h.levels[lits[i].attribute]));
  }
  return log_poisson_pmf(lits.size(), h.lambda_l) -
         log_binomial(static_cast<double>(h.num_attributes()), static_cast<double>(distinct)) - log_levels;
}

double log_prior_poisson(const PatternSet& set, const PoissonHyper& h) {
  double total = log_poisson_pmf(set.size(), h.lambda_m);
  for (const auto& p : set.patterns()) total += poisson_pattern_term(p, h);
  return total;
}

double log_prior(const PatternSet& set, const ModelParams& params, const MinedPool* pool) {
  switch (params.prior) {
    case PriorKind::kBetaBinomial: return log_prior_betabinomial(set, params.betabinomial, pool);
    case PriorKind::kPoisson: return log_prior_poisson(set, params.poisson);
    case PriorKind::kFlat: return 0.0;
  }
  return 0.0;
}

Score score(const PatternSet& set, const DatasetIndex& index, const ModelParams& params, const MinedPool* pool) {
  Score s;
  s.confusion = confusion(set, index);
  s.log_prior = log_prior(set, params, pool);
  s.log_likelihood = log_likelihood(s.confusion, params.likelihood);
  s.log_joint = s.log_prior + s.log_likelihood;
  return s;
}

LikelihoodTable::LikelihoodTable(const LikelihoodHyper& h, std::size_t max_count)
    : log_beta_pos_(log_beta(h.alpha_pos, h.beta_pos)), log_beta_neg_(log_beta(h.alpha_neg, h.beta_neg)) {
  h.validate();
  const std::size_t n = max_count + 1;
  for (auto* v : {&lg_alpha_pos_, &lg_beta_pos_, &lg_sum_pos_, &lg_alpha_neg_, &lg_beta_neg_, &lg_sum_neg_}) v->resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i);
    lg_alpha_pos_[i] = std::lgamma(x + h.alpha_pos);
    lg_beta_pos_[i] = std::lgamma(x + h.beta_pos);
    lg_sum_pos_[i] = std::lgamma(x + (h.alpha_pos + h.beta_pos));
    lg_alpha_neg_[i] = std::lgamma(x + h.alpha_neg);
    lg_beta_neg_[i] = std::lgamma(x + h.beta_neg);
    lg_sum_neg_[i] = std::lgamma(x + (h.alpha_neg + h.beta_neg));
  }
}

double LikelihoodTable::operator()(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) const {
  const double pos = beta_factor(lg_alpha_pos_[tp], lg_beta_pos_[fp], lg_sum_pos_[tp + fp], log_beta_pos_);
  const double neg = beta_factor(lg_alpha_neg_[tn], lg_beta_neg_[fn], lg_sum_neg_[tn + fn], log_beta_neg_);
  return pos + neg;
}

}  // namespace boa
