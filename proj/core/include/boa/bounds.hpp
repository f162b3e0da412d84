#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "boa/model.hpp"

namespace boa {

// Outcome of one bound calculator. When a hypothesis fails, `applicable`
// is false, `reason` says which one, and no number is reported.
struct BoundResult {
  bool applicable = false;
  std::string reason;
  double raw = 0.0;          // the right-hand side before flooring
  std::size_t value = 0;     // floor of raw (clamped at 0)

  explicit operator bool() const { return applicable; }
};

// max{(lambda/2) Gamma(J), (lambda/2)^J}
double g_max(double lambda, std::size_t J);
// (lambda/2)^l Gamma(J - l + 1)
double g_length(double lambda, std::size_t J, std::size_t l);

// ln P(S | empty set): every record predicted negative.
double log_empty_likelihood(const LikelihoodHyper& lh, std::size_t n_pos, std::size_t n_neg);

// True when every value is a positive integer.
bool integer_hyperparameters(const LikelihoodHyper& lh);
bool integer_hyperparameters(const PoissonHyper& h);
bool integer_hyperparameters(const BetaBinomialHyper& h);

// Size cap for the Poisson model. Never below floor(lambda_M).
BoundResult poisson_size_bound(const PoissonHyper& h, const LikelihoodHyper& lh, std::size_t n_pos, std::size_t n_neg);

// Per-length size caps m_l for the Beta-Binomial model (unfloored). Empty
// pools contribute nothing.
std::optional<std::vector<double>> betabinomial_size_per_length(const BetaBinomialHyper& h, const LikelihoodHyper& lh,
                                                       std::size_t n_pos, std::size_t n_neg);
BoundResult betabinomial_size_bound(const BetaBinomialHyper& h, const LikelihoodHyper& lh, std::size_t n_pos, std::size_t n_neg);

// Ratio whose being <= 1 is the shared hypothesis of the support bounds.
double support_hypothesis_ratio(const LikelihoodHyper& lh, std::size_t n_pos, std::size_t n_neg);

BoundResult betabinomial_support_bound(const BetaBinomialHyper& h, const LikelihoodHyper& lh, std::size_t n_pos,
                                   std::size_t n_neg);
BoundResult poisson_support_bound(const PoissonHyper& h, const LikelihoodHyper& lh, std::size_t n_pos, std::size_t n_neg);

// ln sum_{m=1}^{m_upper} C(n, m) where ln n = log_n. Overflow-safe.
double log_sum_binomials(double log_n, std::size_t m_upper);

// log_lik / (N ln 1/2) + sqrt((ln sum_m C(prod(K_j+1), m) + ln(1/delta)) / (2N)).
// Throws ConfigError for delta outside (0,1), m_upper < 1 or N = 0.
double risk_bound(double log_lik, std::size_t n, std::size_t m_upper, std::span<const std::size_t> levels,
                           double delta);

struct BoundReport {
  PriorKind prior = PriorKind::kBetaBinomial;
  bool integer_hyperparameters = false;
  BoundResult size_bound;
  BoundResult support_bound;
  std::optional<double> generalization_bound;
  std::string generalization_note;
  double log_likelihood_used = 0.0;
  double delta = 0.05;

  std::optional<std::size_t> m_upper() const;
  std::optional<std::size_t> min_support_C() const;
};

// Computes the bounds for the chosen prior. `log_lik` feeds the risk bound; pass
// the fitted model's value, or nullopt to use the empty model.
BoundReport bound_report(const ModelParams& params, std::size_t n_pos, std::size_t n_neg, double delta = 0.05,
                         std::optional<double> log_lik = std::nullopt);

nlohmann::json to_json(const BoundResult& r);
nlohmann::json to_json(const BoundReport& report);

}  // namespace boa
