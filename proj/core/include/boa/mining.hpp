#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "boa/data.hpp"
#include "boa/patterns.hpp"

namespace boa {

struct MiningConfig {
  double min_support_fraction = 0.05;  // of |S+|
  // Absolute support count on S+; overrides the fraction when set.
  std::optional<std::size_t> min_support_count;
  std::size_t max_length = 3;
  std::optional<std::size_t> top_k;  // M0; nullopt keeps every pattern
  bool include_negative_literals = true;

  void validate() const;
  std::size_t threshold(std::size_t n_pos) const;
};

struct MinedPattern {
  Pattern pattern;
  std::size_t support_pos = 0;
  std::size_t support_all = 0;
  double tpr = 0.0;
  double fpr = 0.0;
  double cond_entropy = 0.0;  // H(S, a) in bits
};

struct MinedPool {
  std::vector<MinedPattern> patterns;  // canonical pattern order
  std::size_t max_length = 0;

  std::size_t size() const { return patterns.size(); }
  bool empty() const { return patterns.empty(); }
  // |pool^[l]| for l = 1..max_length (index 0 is length 1).
  std::vector<std::size_t> pool_sizes() const;
  std::vector<Pattern> pattern_list() const;
  bool contains(const Pattern& p) const;
};

// Binary label entropy of the whole index, in bits.
double label_entropy(const DatasetIndex& index);
// H(S, a): size-weighted label entropy of the covered and uncovered parts.
double conditional_entropy(const Bitset& coverage, const DatasetIndex& index);

// Fills support_all, tpr, fpr and cond_entropy from the pattern's coverage.
MinedPattern describe(Pattern pattern, const DatasetIndex& index);

// FP-growth over the positive records. Returns every conjunction of at most
// max_length literals whose support on S+ reaches the threshold, skipping
// same-attribute/same-test combinations. Throws DataError when S+ is empty.
MinedPool mine_frequent(const DatasetIndex& index, const MiningConfig& config);

// Keeps patterns with tpr >= fpr.
MinedPool roc_filter(MinedPool pool);

// Keeps the top_k patterns with the smallest H(S, a); ties go to the
// canonically smaller pattern.
MinedPool info_gain_screen(MinedPool pool, std::size_t top_k);

// Drops patterns whose support over all of S is below min_support_all.
MinedPool filter_support_all(MinedPool pool, std::size_t min_support_all);

// mine_frequent, then roc_filter, then info_gain_screen when top_k is set.
MinedPool mine_pool(const DatasetIndex& index, const MiningConfig& config);

// Rebuilds a pool from stored patterns against an index (e.g. when loading
// a pool file).
MinedPool make_pool(std::vector<Pattern> patterns, const DatasetIndex& index, std::size_t max_length);

// {"max_length", "schema_fingerprint", "patterns": [{"literals", "rule",
// "support_pos", "support_all", "tpr", "fpr", "cond_entropy"}, ...]}
nlohmann::json pool_to_json(const MinedPool& pool, const Schema& schema);
// Statistics are recomputed against `index`. Throws DataError on a schema
// mismatch or a malformed document.
MinedPool pool_from_json(const nlohmann::json& doc, const DatasetIndex& index);

}  // namespace boa
