#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "boa/bitset.hpp"
#include "boa/data.hpp"

namespace boa {

// A conjunction of literals with its coverage over one DatasetIndex.
// Equality and ordering look at the literals only.
class Pattern {
 public:
  Pattern() = default;

  // Sorts and dedups the literals and computes coverage. Throws ModelError
  // on an empty conjunction, a literal outside the index universe, or two
  // conflicting literals (see literals_conflict).
  static Pattern make(std::vector<Literal> literals, const DatasetIndex& index);
  // Same, for literals given by universe id.
  static Pattern from_ids(std::span<const std::size_t> literal_ids, const DatasetIndex& index);

  std::span<const Literal> literals() const { return literals_; }
  std::size_t length() const { return literals_.size(); }
  const Bitset& coverage() const { return coverage_; }

  // Same literals, coverage recomputed against another index (e.g. a test fold).
  Pattern rebind(const DatasetIndex& index) const { return make(literals_, index); }

  bool operator==(const Pattern& o) const { return literals_ == o.literals_; }
  // Canonical set order: shorter patterns first, then lexicographic literals.
  bool operator<(const Pattern& o) const {
    if (literals_.size() != o.literals_.size()) return literals_.size() < o.literals_.size();
    return literals_ < o.literals_;
  }

  std::string render(const Schema& schema) const;

 private:
  std::vector<Literal> literals_;
  Bitset coverage_;
};

// A disjunction of distinct patterns, kept in canonical order.
class PatternSet {
 public:
  PatternSet() = default;
  explicit PatternSet(std::vector<Pattern> patterns);

  std::span<const Pattern> patterns() const { return patterns_; }
  std::size_t size() const { return patterns_.size(); }
  bool empty() const { return patterns_.empty(); }
  const Pattern& operator[](std::size_t i) const { return patterns_[i]; }

  bool contains(const Pattern& p) const;
  // Returns false when the pattern was already present.
  bool insert(Pattern p);
  bool erase(const Pattern& p);

  PatternSet rebind(const DatasetIndex& index) const;

  bool operator==(const PatternSet& o) const { return patterns_ == o.patterns_; }
  // Canonical order on sets: by size, then lexicographic over patterns.
  bool operator<(const PatternSet& o) const;

  // "IF (a = x AND b >= 3) OR (...) THEN positive"
  std::string render(const Schema& schema) const;

 private:
  std::vector<Pattern> patterns_;
};

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  bool operator==(const ConfusionCounts&) const = default;
  std::size_t positives() const { return tp + fn; }
  std::size_t negatives() const { return fp + tn; }
  std::size_t total() const { return tp + fp + tn + fn; }
  std::size_t errors() const { return fp + fn; }
};

enum class SupportScope { kAll, kPositive };

// True iff every literal of the pattern covers the record.
bool covers(const Pattern& pattern, std::size_t record, const DatasetIndex& index);
// Bit n set iff some pattern covers record n.
Bitset classify(const PatternSet& set, const DatasetIndex& index);
ConfusionCounts confusion(const PatternSet& set, const DatasetIndex& index);
ConfusionCounts confusion_from_prediction(const Bitset& prediction, const DatasetIndex& index);
// Size of the symmetric difference, counted in whole patterns.
std::size_t edit_distance(const PatternSet& a, const PatternSet& b);
std::size_t support(const Pattern& pattern, const DatasetIndex& index, SupportScope scope = SupportScope::kAll);

std::string schema_fingerprint(const Schema& schema);

// {"patterns": [[{"attr": name, "test": "geq", "level": label}, ...], ...],
//  "schema_fingerprint": "..."}
nlohmann::json pattern_set_to_json(const PatternSet& set, const Schema& schema);
nlohmann::json pattern_to_json(const Pattern& pattern, const Schema& schema);
std::vector<Literal> literals_from_json(const nlohmann::json& conj, const Schema& schema);
// Throws DataError when the fingerprint or any name does not match the index schema.
PatternSet pattern_set_from_json(const nlohmann::json& doc, const DatasetIndex& index);

}  // namespace boa
