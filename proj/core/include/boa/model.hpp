#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "boa/data.hpp"
#include "boa/mining.hpp"
#include "boa/patterns.hpp"

namespace boa {

enum class PriorKind {
  kBetaBinomial,
  kPoisson,
  // No prior term. Used by the planted-recovery simulation, where every
  // candidate has the same length and the prior carries no information.
  kFlat,
};

std::string_view to_string(PriorKind kind);
PriorKind parse_prior_kind(std::string_view text);

// Beta(alpha_pos, beta_pos) on rho+, Beta(alpha_neg, beta_neg) on rho-.
struct LikelihoodHyper {
  double alpha_pos = 100.0;
  double beta_pos = 1.0;
  double alpha_neg = 1.0;
  double beta_neg = 100.0;

  void validate() const;
  bool operator==(const LikelihoodHyper&) const = default;
};

// Per-length Beta(alpha_l, beta_l) inclusion priors over pools of size
// pool_sizes[l-1].
struct BetaBinomialHyper {
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<std::size_t> pool_sizes;

  std::size_t max_length() const { return pool_sizes.size(); }
  void validate() const;
  // alpha_l = 1, beta_l = max(|pool_l|, 1).
  static BetaBinomialHyper defaults(std::vector<std::size_t> pool_sizes);
};

struct PoissonHyper {
  double lambda_m = 3.0;
  double lambda_l = 2.0;
  // Schema facts: J = levels.size(), K_j = levels[j].
  std::vector<std::size_t> levels;

  std::size_t num_attributes() const { return levels.size(); }
  void validate() const;
  static PoissonHyper for_schema(const Schema& schema, double lambda_m, double lambda_l);
};

// Everything the objective needs, resolved against one dataset and pool.
struct ModelParams {
  PriorKind prior = PriorKind::kBetaBinomial;
  LikelihoodHyper likelihood;
  BetaBinomialHyper betabinomial;
  PoissonHyper poisson;
};

struct Score {
  double log_prior = 0.0;
  double log_likelihood = 0.0;
  double log_joint = 0.0;
  ConfusionCounts confusion;

  // E_S(A) = -log P(S, A)
  double energy() const { return -log_joint; }
};

// ln B(a, b) = lnG(a) + lnG(b) - lnG(a + b)
double log_beta(double a, double b);
double log_poisson_pmf(std::size_t k, double lambda);
double log_binomial(double n, double k);

// Beta-integrated likelihood of the four confusion counts. TP pairs with
// alpha_pos, FP with beta_pos, TN with alpha_neg, FN with beta_neg.
double log_likelihood(const ConfusionCounts& conf, const LikelihoodHyper& h);

// Sum over lengths of ln B(M_l + a_l, |pool_l| - M_l + b_l) - ln B(a_l, b_l).
double log_prior_betabinomial_counts(std::span<const std::size_t> counts_by_length, const BetaBinomialHyper& h);
// Throws ModelError for patterns longer than the pool range, patterns
// missing from `pool` (when given), or M_l > |pool_l|.
double log_prior_betabinomial(const PatternSet& set, const BetaBinomialHyper& h, const MinedPool* pool = nullptr);

// ln Poisson(L; lambda_L) - ln C(J, d) - sum_k ln K_{v_k} for one pattern,
// where L is the literal count and d the number of distinct attributes.
double poisson_pattern_term(std::span<const Literal> literals, const PoissonHyper& h);
inline double poisson_pattern_term(const Pattern& pattern, const PoissonHyper& h) {
  return poisson_pattern_term(pattern.literals(), h);
}
// ln Poisson(M; lambda_M) + sum of pattern terms. The normalizer omega and the
// truncation constants do not depend on the set and are left out.
double log_prior_poisson(const PatternSet& set, const PoissonHyper& h);

double log_prior(const PatternSet& set, const ModelParams& params, const MinedPool* pool = nullptr);
Score score(const PatternSet& set, const DatasetIndex& index, const ModelParams& params, const MinedPool* pool = nullptr);

// Table-driven evaluation of the likelihood for one dataset size. Gives the
// same doubles as log_likelihood() for counts up to the table size.
class LikelihoodTable {
 public:
  LikelihoodTable(const LikelihoodHyper& h, std::size_t max_count);
  double operator()(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) const;
  double operator()(const ConfusionCounts& c) const { return (*this)(c.tp, c.fp, c.tn, c.fn); }

 private:
  std::vector<double> lg_alpha_pos_, lg_beta_pos_, lg_sum_pos_;
  std::vector<double> lg_alpha_neg_, lg_beta_neg_, lg_sum_neg_;
  double log_beta_pos_ = 0.0;
  double log_beta_neg_ = 0.0;
};

}  // namespace boa
