#include "boa/patterns.hpp"

#include <algorithm>

#include "boa/errors.hpp"

namespace boa {

using json = nlohmann::json;

Pattern Pattern::make(std::vector<Literal> literals, const DatasetIndex& index) {
  std::sort(literals.begin(), literals.end());
  literals.erase(std::unique(literals.begin(), literals.end()), literals.end());
  if (literals.empty()) throw ModelError("pattern: empty conjunction");
  for (std::size_t i = 0; i + 1 < literals.size(); ++i) {
    for (std::size_t j = i + 1; j < literals.size() && literals[j].attribute == literals[i].attribute; ++j) {
      if (literals_conflict(literals[i], literals[j])) throw ModelError("pattern: conflicting literals");
    }
  }
  Pattern p;
  p.coverage_ = Bitset(index.num_records(), true);
  for (const auto& lit : literals) {
    const auto id = index.literal_id(lit);
    if (!id) throw ModelError("pattern: literal outside the index universe");
    p.coverage_ &= index.coverage(*id);
  }
  p.literals_ = std::move(literals);
  return p;
}

Pattern Pattern::from_ids(std::span<const std::size_t> literal_ids, const DatasetIndex& index) {
  std::vector<Literal> lits;
  lits.reserve(literal_ids.size());
  for (std::size_t id : literal_ids) lits.push_back(index.universe()[id]);
  return make(std::move(lits), index);
}

std::string Pattern::render(const Schema& schema) const {
  std::string out;
  for (std::size_t i = 0; i < literals_.size(); ++i) {
    if (i != 0) out += " AND ";
    out += literals_[i].render(schema);
  }
  return out;
}

PatternSet::PatternSet(std::vector<Pattern> patterns) : patterns_(std::move(patterns)) {
  std::sort(patterns_.begin(), patterns_.end());
  patterns_.erase(std::unique(patterns_.begin(), patterns_.end()), patterns_.end());
}

bool PatternSet::contains(const Pattern& p) const { return std::binary_search(patterns_.begin(), patterns_.end(), p); }

bool PatternSet::insert(Pattern p) {
  const auto it = std::lower_bound(patterns_.begin(), patterns_.end(), p);
  if (it != patterns_.end() && *it == p) return false;
  patterns_.insert(it, std::move(p));
  return true;
}

bool PatternSet::erase(const Pattern& p) {
  const auto it = std::lower_bound(patterns_.begin(), patterns_.end(), p);
  if (it == patterns_.end() || !(*it == p)) return false;
  patterns_.erase(it);
  return true;
}

PatternSet PatternSet::rebind(const DatasetIndex& index) const {
  std::vector<Pattern> out;
  out.reserve(patterns_.size());
  for (const auto& p : patterns_) out.push_back(p.rebind(index));
  return PatternSet(std::move(out));
}

bool PatternSet::operator<(const PatternSet& o) const {
  if (patterns_.size() != o.patterns_.size()) return patterns_.size() < o.patterns_.size();
  return std::lexicographical_compare(patterns_.begin(), patterns_.end(), o.patterns_.begin(), o.patterns_.end());
}

std::string PatternSet::render(const Schema& schema) const {
  if (patterns_.empty()) return "IF (nothing) THEN positive";
  std::string out = "IF ";
  for (std::size_t i = 0; i < patterns_.size(); ++i) {
    if (i != 0) out += " OR ";
    out += "(" + patterns_[i].render(schema) + ")";
  }
  return out + " THEN positive";
}

bool covers(const Pattern& pattern, std::size_t record, const DatasetIndex& index) {
  for (const auto& lit : pattern.literals()) {
    const auto id = index.literal_id(lit);
    if (!id || !index.coverage(*id).test(record)) return false;
  }
  return true;
}

Bitset classify(const PatternSet& set, const DatasetIndex& index) {
  Bitset pred(index.num_records());
  for (const auto& p : set.patterns()) pred |= p.coverage();
  return pred;
}

ConfusionCounts confusion_from_prediction(const Bitset& prediction, const DatasetIndex& index) {
  ConfusionCounts c;
  c.tp = count_and(prediction, index.labels());
  c.fp = prediction.count() - c.tp;
  c.fn = index.num_positive() - c.tp;
  c.tn = index.num_negative() - c.fp;
  return c;
}

ConfusionCounts confusion(const PatternSet& set, const DatasetIndex& index) {
  return confusion_from_prediction(classify(set, index), index);
}

std::size_t edit_distance(const PatternSet& a, const PatternSet& b) {
  const auto pa = a.patterns();
  const auto pb = b.patterns();
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t common = 0;
  while (i < pa.size() && j < pb.size()) {
    if (pa[i] == pb[j]) {
      ++common;
      ++i;
      ++j;
    } else if (pa[i] < pb[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return pa.size() + pb.size() - 2 * common;
}

std::size_t support(const Pattern& pattern, const DatasetIndex& index, SupportScope scope) {
  if (scope == SupportScope::kPositive) return count_and(pattern.coverage(), index.labels());
  return pattern.coverage().count();
}

std::string schema_fingerprint(const Schema& schema) { return fingerprint_bytes(schema_to_json(schema)); }

json pattern_to_json(const Pattern& pattern, const Schema& schema) {
  json conj = json::array();
  for (const auto& lit : pattern.literals()) {
    const auto& attr = schema.attributes.at(lit.attribute);
    conj.push_back({{"attr", attr.name}, {"test", std::string(to_string(lit.test))}, {"level", attr.levels.at(lit.level)}});
  }
  return conj;
}

json pattern_set_to_json(const PatternSet& set, const Schema& schema) {
  json doc;
  doc["patterns"] = json::array();
  for (const auto& p : set.patterns()) doc["patterns"].push_back(pattern_to_json(p, schema));
  doc["schema_fingerprint"] = schema_fingerprint(schema);
  return doc;
}

std::vector<Literal> literals_from_json(const json& conj, const Schema& schema) {
  std::vector<Literal> lits;
  for (const auto& l : conj) {
    const auto name = l.at("attr").get<std::string>();
    const auto a = schema.attribute_index(name);
    if (!a) throw DataError("pattern references unknown attribute '" + name + "'");
    const auto test = parse_test_kind(l.at("test").get<std::string>());
    if (!test) throw DataError("pattern has unknown test '" + l.at("test").get<std::string>() + "'");
    const auto& level_json = l.at("level");
    const std::string label = level_json.is_string() ? level_json.get<std::string>() : level_json.dump();
    const auto lv = schema.attributes[*a].level_index(label);
    if (!lv) throw DataError("pattern references unknown level '" + label + "' of '" + name + "'");
    Literal lit{static_cast<std::uint32_t>(*a), *test, *lv};
    if (!lit.valid_for(schema)) throw DataError("pattern literal test does not match attribute kind: " + name);
    lits.push_back(lit);
  }
  return lits;
}

PatternSet pattern_set_from_json(const json& doc, const DatasetIndex& index) {
  if (doc.contains("schema_fingerprint")) {
    const auto fp = doc.at("schema_fingerprint").get<std::string>();
    if (fp != schema_fingerprint(index.schema())) throw DataError("pattern set was built for a different schema");
  }
  std::vector<Pattern> patterns;
  try {
    for (const auto& conj : doc.at("patterns")) patterns.push_back(Pattern::make(literals_from_json(conj, index.schema()), index));
  } catch (const json::exception& e) {
    throw DataError(std::string("pattern set: ") + e.what());
  } catch (const ModelError& e) {
    throw DataError(std::string("pattern set: ") + e.what());
  }
  return PatternSet(std::move(patterns));
}

}  // namespace boa
