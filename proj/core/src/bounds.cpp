#include "boa/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "boa/errors.hpp"

namespace boa {

using json = nlohmann::json;

namespace {

bool is_positive_integer(double v) { return v >= 1.0 && std::floor(v) == v && std::isfinite(v); }

double log_g_max(double lambda, std::size_t J) {
  const double jd = static_cast<double>(J);
  const double half = std::log(lambda / 2.0);
  return std::max(half + std::lgamma(jd), jd * half);
}

BoundResult fail(std::string reason) {
  BoundResult r;
  r.applicable = false;
  r.reason = std::move(reason);
  return r;
}

BoundResult pass(double raw) {
  BoundResult r;
  r.applicable = true;
  r.raw = raw;
  r.value = raw <= 0.0 ? 0 : static_cast<std::size_t>(std::floor(raw));
  return r;
}

bool all_levels_at_least_two(std::span<const std::size_t> levels) {
  return std::all_of(levels.begin(), levels.end(), [](std::size_t k) { return k >= 2; });
}

// ln of 1 / support_hypothesis_ratio, or nullopt when a factor is undefined.
std::optional<double> support_log_denominator(const LikelihoodHyper& lh, std::size_t n_pos, std::size_t n_neg) {
  const double sp = static_cast<double>(n_pos);
  const double sn = static_cast<double>(n_neg);
  const double a = sp + lh.alpha_pos - 1.0;
  if (!(a > 0.0)) return std::nullopt;
  return std::log(a) - std::log(sp + lh.alpha_pos + lh.beta_pos - 1.0) + std::log(sn + lh.alpha_neg + lh.beta_neg) -
         std::log(lh.beta_neg);
}

}  // namespace

double g_max(double lambda, std::size_t J) { return std::exp(log_g_max(lambda, J)); }

double g_length(double lambda, std::size_t J, std::size_t l) {
  return std::exp(static_cast<double>(l) * std::log(lambda / 2.0) + std::lgamma(static_cast<double>(J - l) + 1.0));
}

double log_empty_likelihood(const LikelihoodHyper& lh, std::size_t n_pos, std::size_t n_neg) {
  return log_likelihood(ConfusionCounts{0, 0, n_neg, n_pos}, lh);
}

bool integer_hyperparameters(const LikelihoodHyper& lh) {
  return is_positive_integer(lh.alpha_pos) && is_positive_integer(lh.beta_pos) && is_positive_integer(lh.alpha_neg) &&
         is_positive_integer(lh.beta_neg);
}

bool integer_hyperparameters(const PoissonHyper& h) {
  return is_positive_integer(h.lambda_m) && is_positive_integer(h.lambda_l);
}

bool integer_hyperparameters(const BetaBinomialHyper& h) {
  return std::all_of(h.alpha.begin(), h.alpha.end(), is_positive_integer) &&
         std::all_of(h.beta.begin(), h.beta.end(), is_positive_integer);
}

BoundResult poisson_size_bound(const PoissonHyper& h, const LikelihoodHyper& lh, std::size_t n_pos, std::size_t n_neg) {
  if (!integer_hyperparameters(h) || !integer_hyperparameters(lh)) return fail("hyperparameters are not positive integers");
  const std::size_t J = h.num_attributes();
  if (J == 0) return fail("schema has no attributes");
  if (!all_levels_at_least_two(h.levels)) return fail("an attribute has fewer than two levels");
  const double jd = static_cast<double>(J);
  if (-h.lambda_l + jd * std::log(h.lambda_l / 2.0) - std::lgamma(jd + 1.0) > 0.0) {
    return fail("e^-lambda_L (lambda_L/2)^J / Gamma(J+1) > 1");
  }
  const double log_x = -h.lambda_l + std::log(h.lambda_m) + log_g_max(h.lambda_l, J) - std::lgamma(jd + 1.0);
  const double log_ratio = log_x - std::log(h.lambda_m + 1.0);
  if (log_ratio >= 0.0) return fail("x / (lambda_M + 1) >= 1");
  const double numer = log_empty_likelihood(lh, n_pos, n_neg) + std::lgamma(h.lambda_m + 1.0) - h.lambda_m * log_x;
  return pass(h.lambda_m + std::max(0.0, numer / log_ratio));
}

std::optional<std::vector<double>> betabinomial_size_per_length(const BetaBinomialHyper& h, const LikelihoodHyper& lh,
                                                       std::size_t n_pos, std::size_t n_neg) {
  for (std::size_t l = 0; l < h.max_length(); ++l) {
    if (!(h.alpha[l] < h.beta[l])) return std::nullopt;
  }
  const double log_empty = log_empty_likelihood(lh, n_pos, n_neg);
  std::vector<double> m(h.max_length(), 0.0);
  for (std::size_t l = 0; l < h.max_length(); ++l) {
    const double pool = static_cast<double>(h.pool_sizes[l]);
    if (h.pool_sizes[l] == 0) continue;
    const double top = pool + h.alpha[l] - 1.0;
    if (!(top > 0.0)) continue;
    const double denom = std::log(top) - std::log(pool + h.beta[l] - 1.0);
    m[l] = log_empty / denom;
  }
  return m;
}

BoundResult betabinomial_size_bound(const BetaBinomialHyper& h, const LikelihoodHyper& lh, std::size_t n_pos, std::size_t n_neg) {
  if (!integer_hyperparameters(h) || !integer_hyperparameters(lh)) return fail("hyperparameters are not positive integers");
  const auto m = betabinomial_size_per_length(h, lh, n_pos, n_neg);
  if (!m) return fail("alpha_l >= beta_l for some length");
  double total = 0.0;
  for (double v : *m) total += v;
  return pass(total);
}

double support_hypothesis_ratio(const LikelihoodHyper& lh, std::size_t n_pos, std::size_t n_neg) {
  const double sp = static_cast<double>(n_pos);
  const double sn = static_cast<double>(n_neg);
  return (sp + lh.alpha_pos + lh.beta_pos - 1.0) / (sp + lh.alpha_pos - 1.0) * lh.beta_neg / (sn + lh.alpha_neg + lh.beta_neg);
}

BoundResult betabinomial_support_bound(const BetaBinomialHyper& h, const LikelihoodHyper& lh, std::size_t n_pos,
                                   std::size_t n_neg) {
  if (!integer_hyperparameters(h) || !integer_hyperparameters(lh)) return fail("hyperparameters are not positive integers");
  const auto denom = support_log_denominator(lh, n_pos, n_neg);
  if (!denom || !(*denom > 0.0)) return fail("likelihood ratio hypothesis fails");
  const auto m = betabinomial_size_per_length(h, lh, n_pos, n_neg);
  if (!m) return fail("alpha_l >= beta_l for some length");
  double log_min = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < h.max_length(); ++l) {
    if (h.pool_sizes[l] == 0) continue;
    const double top = static_cast<double>(h.pool_sizes[l]) - (*m)[l] + h.beta[l];
    const double bottom = (*m)[l] - 1.0 + h.alpha[l];
    if (!(top > 0.0)) return fail("|A_l| - m_l + beta_l <= 0 for length " + std::to_string(l + 1));
    if (!(bottom > 0.0)) continue;
    log_min = std::min(log_min, std::log(top) - std::log(bottom));
  }
  if (!std::isfinite(log_min)) return fail("every pool is empty");
  return pass(log_min / *denom);
}

BoundResult poisson_support_bound(const PoissonHyper& h, const LikelihoodHyper& lh, std::size_t n_pos, std::size_t n_neg) {
  if (!integer_hyperparameters(h) || !integer_hyperparameters(lh)) return fail("hyperparameters are not positive integers");
  const std::size_t J = h.num_attributes();
  if (J == 0) return fail("schema has no attributes");
  if (!all_levels_at_least_two(h.levels)) return fail("an attribute has fewer than two levels");
  const auto denom = support_log_denominator(lh, n_pos, n_neg);
  if (!denom || !(*denom > 0.0)) return fail("likelihood ratio hypothesis fails");
  const double numer =
      std::lgamma(static_cast<double>(J) + 1.0) - std::log(h.lambda_m) + h.lambda_l - log_g_max(h.lambda_l, J);
  return pass(numer / *denom);
}

double log_sum_binomials(double log_n, std::size_t m_upper) {
  const double n = std::exp(log_n);
  double acc = -std::numeric_limits<double>::infinity();
  double log_falling = 0.0;  // ln n (n-1) ... (n-m+1)
  const double inv_n = std::exp(-log_n);
  for (std::size_t m = 1; m <= m_upper; ++m) {
    const double i = static_cast<double>(m - 1);
    if (i >= n) break;
    log_falling += log_n + std::log1p(-i * inv_n);
    const double term = log_falling - std::lgamma(static_cast<double>(m) + 1.0);
    const double hi = std::max(acc, term);
    acc = hi + std::log(std::exp(acc - hi) + std::exp(term - hi));
  }
  return acc;
}

double risk_bound(double log_lik, std::size_t n, std::size_t m_upper, std::span<const std::size_t> levels,
                           double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  if (m_upper < 1) throw ConfigError("m_upper must be at least 1");
  if (n == 0) throw ConfigError("need at least one record");
  double log_patterns = 0.0;
  for (std::size_t k : levels) log_patterns += std::log(static_cast<double>(k) + 1.0);
  const double nd = static_cast<double>(n);
  const double complexity = log_sum_binomials(log_patterns, m_upper) + std::log(1.0 / delta);
  return log_lik / (nd * std::log(0.5)) + std::sqrt(complexity / (2.0 * nd));
}

std::optional<std::size_t> BoundReport::m_upper() const {
  if (!size_bound) return std::nullopt;
  return size_bound.value;
}

std::optional<std::size_t> BoundReport::min_support_C() const {
  if (!support_bound) return std::nullopt;
  return support_bound.value;
}

BoundReport bound_report(const ModelParams& params, std::size_t n_pos, std::size_t n_neg, double delta,
                         std::optional<double> log_lik) {
  BoundReport r;
  r.prior = params.prior;
  r.delta = delta;
  switch (params.prior) {
    case PriorKind::kBetaBinomial:
      r.integer_hyperparameters = integer_hyperparameters(params.likelihood) && integer_hyperparameters(params.betabinomial);
      r.size_bound = betabinomial_size_bound(params.betabinomial, params.likelihood, n_pos, n_neg);
      r.support_bound = betabinomial_support_bound(params.betabinomial, params.likelihood, n_pos, n_neg);
      break;
    case PriorKind::kPoisson:
      r.integer_hyperparameters = integer_hyperparameters(params.likelihood) && integer_hyperparameters(params.poisson);
      r.size_bound = poisson_size_bound(params.poisson, params.likelihood, n_pos, n_neg);
      r.support_bound = poisson_support_bound(params.poisson, params.likelihood, n_pos, n_neg);
      break;
    case PriorKind::kFlat:
      r.size_bound = fail("no bound for the flat prior");
      r.support_bound = fail("no bound for the flat prior");
      break;
  }
  r.log_likelihood_used = log_lik.value_or(log_empty_likelihood(params.likelihood, n_pos, n_neg));
  r.generalization_note = log_lik ? "fitted model likelihood" : "empty model likelihood";
  if (!r.size_bound) {
    r.generalization_note = "not applicable: no size bound";
  } else if (r.size_bound.value < 1) {
    r.generalization_note = "not applicable: size bound below 1";
  } else if (n_pos + n_neg == 0) {
    r.generalization_note = "not applicable: empty dataset";
  } else {
    r.generalization_bound = risk_bound(r.log_likelihood_used, n_pos + n_neg, r.size_bound.value,
                                                 params.poisson.levels, delta);
  }
  return r;
}

json to_json(const BoundResult& r) {
  json j;
  j["applicable"] = r.applicable;
  if (r.applicable) {
    j["raw"] = r.raw;
    j["value"] = r.value;
  } else {
    j["reason"] = r.reason;
  }
  return j;
}

json to_json(const BoundReport& report) {
  json j;
  j["prior"] = std::string(to_string(report.prior));
  j["integer_hyperparameters"] = report.integer_hyperparameters;
  j["size_bound"] = to_json(report.size_bound);
  j["support_bound"] = to_json(report.support_bound);
  j["m_upper"] = report.m_upper() ? json(*report.m_upper()) : json(nullptr);
  j["min_support_C"] = report.min_support_C() ? json(*report.min_support_C()) : json(nullptr);
  j["delta"] = report.delta;
  j["log_likelihood_used"] = report.log_likelihood_used;
  j["generalization_bound"] = report.generalization_bound ? json(*report.generalization_bound) : json(nullptr);
  j["generalization_note"] = report.generalization_note;
  return j;
}

}  // namespace boa
