#pragma once

// Small random instances shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "boa/data.hpp"
#include "boa/bounds.hpp"
#include "boa/infer.hpp"
#include "boa/mining.hpp"
#include "boa/patterns.hpp"
#include "boa/rng.hpp"

namespace boa::testing {

inline Schema random_schema(Rng& rng, std::size_t attributes, std::size_t max_levels, bool allow_ordinal = true) {
  Schema s;
  s.label_column = "y";
  s.positive_label = "1";
  for (std::size_t j = 0; j < attributes; ++j) {
    AttributeSchema a;
    a.name = "a" + std::to_string(j);
    a.kind = allow_ordinal && rng.bernoulli(0.5) ? AttributeKind::kOrdinal : AttributeKind::kCategorical;
    const std::size_t k = 2 + rng.below(max_levels - 1);
    for (std::size_t l = 0; l < k; ++l) a.levels.push_back("v" + std::to_string(l));
    s.attributes.push_back(std::move(a));
  }
  return s;
}

// Uniform cells; labels are random but both classes are present when n >= 2.
inline Table random_table(const Schema& schema, std::size_t n, Rng& rng, double missing = 0.0) {
  Table t;
  t.schema = schema;
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<std::int32_t> row;
    for (const auto& a : schema.attributes) {
      row.push_back(rng.bernoulli(missing) ? kMissing : static_cast<std::int32_t>(rng.below(a.levels.size())));
    }
    t.cells.push_back(std::move(row));
    t.labels.push_back(static_cast<std::uint8_t>(rng.below(2)));
  }
  if (n >= 2) {
    t.labels[0] = 1;
    t.labels[1] = 0;
  }
  return t;
}

// Labels taken from a hidden rule, with a few flipped.
inline Table rule_table(const Schema& schema, std::size_t n, Rng& rng, double flip = 0.05) {
  Table t = random_table(schema, n, rng);
  const std::uint32_t lv0 = static_cast<std::uint32_t>(rng.below(schema.attributes[0].levels.size()));
  const std::uint32_t lv1 = static_cast<std::uint32_t>(rng.below(schema.attributes[1].levels.size()));
  for (std::size_t r = 0; r < n; ++r) {
    const bool y = t.cells[r][0] == static_cast<std::int32_t>(lv0) || t.cells[r][1] == static_cast<std::int32_t>(lv1);
    t.labels[r] = static_cast<std::uint8_t>(rng.bernoulli(flip) ? !y : y);
  }
  return t;
}

// Straight evaluation of one literal on one cell, written out separately
// from Literal::satisfied_by.
inline bool literal_holds(const Literal& lit, std::int32_t cell) {
  if (cell == kMissing) return false;
  const auto v = static_cast<std::uint32_t>(cell);
  if (lit.test == TestKind::kEq) return v == lit.level;
  if (lit.test == TestKind::kNeq) return v != lit.level;
  if (lit.test == TestKind::kGeq) return v >= lit.level;
  return v <= lit.level;
}

inline bool conjunction_holds(std::span<const Literal> lits, const std::vector<std::int32_t>& row) {
  return std::all_of(lits.begin(), lits.end(), [&](const Literal& l) { return literal_holds(l, row[l.attribute]); });
}

// A random valid conjunction of up to max_len literals from the index universe.
inline Pattern random_pattern(const DatasetIndex& index, std::size_t max_len, Rng& rng) {
  const std::size_t u = index.universe().size();
  for (;;) {
    const std::size_t len = 1 + rng.below(max_len);
    std::vector<Literal> lits;
    for (std::size_t i = 0; i < len; ++i) {
      const Literal cand = index.universe()[rng.below(u)];
      bool ok = true;
      for (const auto& l : lits) ok = ok && !(l == cand) && !literals_conflict(l, cand);
      if (ok) lits.push_back(cand);
    }
    if (!lits.empty()) return Pattern::make(std::move(lits), index);
  }
}

inline PatternSet random_set(const std::vector<Pattern>& candidates, Rng& rng, double p = 0.4) {
  std::vector<Pattern> chosen;
  for (const auto& c : candidates) {
    if (rng.bernoulli(p)) chosen.push_back(c);
  }
  return PatternSet(std::move(chosen));
}

// Up to `count` distinct patterns, optionally with every literal on its own attribute.
inline std::vector<Pattern> distinct_patterns(const DatasetIndex& index, std::size_t count, std::size_t max_len,
                                              Rng& rng, bool distinct_attributes) {
  std::vector<Pattern> out;
  for (std::size_t tries = 0; out.size() < count && tries < 2000; ++tries) {
    Pattern p = random_pattern(index, max_len, rng);
    if (distinct_attributes) {
      std::vector<std::uint32_t> attrs;
      for (const auto& l : p.literals()) attrs.push_back(l.attribute);
      std::sort(attrs.begin(), attrs.end());
      if (std::adjacent_find(attrs.begin(), attrs.end()) != attrs.end()) continue;
    }
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(std::move(p));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// A tiny instance for checking the size and support bounds against the
// exhaustive MAP. Hyperparameters are drawn until the chosen prior's
// bounds apply; the caller still checks the applicability flags.
struct BoundInstance {
  DatasetIndex index;
  std::vector<Pattern> candidates;
  ModelParams params;
  BoundReport bounds;
};

inline BoundInstance bound_instance(Rng& rng, PriorKind prior) {
  for (;;) {
    BoundInstance inst;
    const Schema s = random_schema(rng, 3 + rng.below(2), 3);
    inst.index = build_index(rule_table(s, 8 + rng.below(25), rng, 0.15));
    if (inst.index.num_positive() == 0 || inst.index.num_negative() == 0) continue;
    const bool poisson = prior == PriorKind::kPoisson;
    inst.candidates = distinct_patterns(inst.index, 6 + rng.below(7), 2, rng, poisson);
    const std::size_t ints[] = {1, 2, 5, 10, 50, 100};
    auto pick = [&] { return static_cast<double>(ints[rng.below(std::size(ints))]); };
    ModelParams& p = inst.params;
    p.prior = prior;
    p.likelihood = LikelihoodHyper{pick(), 1.0, 1.0, pick()};
    if (poisson) {
      p.poisson = PoissonHyper::for_schema(s, static_cast<double>(1 + rng.below(3)), static_cast<double>(1 + rng.below(3)));
    } else {
      const MinedPool pool = make_pool(inst.candidates, inst.index, 2);
      p.betabinomial = BetaBinomialHyper::defaults(pool.pool_sizes());
      for (std::size_t l = 0; l < p.betabinomial.beta.size(); ++l) {
        p.betabinomial.beta[l] = static_cast<double>(p.betabinomial.pool_sizes[l] + 1 + rng.below(20));
      }
    }
    inst.bounds = bound_report(p, inst.index.num_positive(), inst.index.num_negative());
    if (inst.bounds.size_bound && inst.bounds.support_bound) return inst;
  }
}

}  // namespace boa::testing
