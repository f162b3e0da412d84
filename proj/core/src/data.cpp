#include "boa/data.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "boa/errors.hpp"

namespace boa {

using json = nlohmann::json;

std::optional<std::uint32_t> AttributeSchema::level_index(std::string_view label) const {
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] == label) return static_cast<std::uint32_t>(i);
  }
  return std::nullopt;
}

std::optional<std::size_t> Schema::attribute_index(std::string_view name) const {
  for (std::size_t i = 0; i < attributes.size(); ++i) {
    if (attributes[i].name == name) return i;
  }
  return std::nullopt;
}

void Schema::validate() const {
  std::set<std::string> names;
  for (const auto& attr : attributes) {
    if (attr.name.empty()) throw ConfigError("schema: attribute with empty name");
    if (!names.insert(attr.name).second) throw ConfigError("schema: duplicate attribute '" + attr.name + "'");
    if (attr.levels.empty()) throw ConfigError("schema: attribute '" + attr.name + "' has no levels");
    std::set<std::string> seen(attr.levels.begin(), attr.levels.end());
    if (seen.size() != attr.levels.size()) {
      throw ConfigError("schema: attribute '" + attr.name + "' has duplicate levels");
    }
  }
  if (names.count(label_column) != 0) throw ConfigError("schema: label column collides with an attribute name");
}

namespace {

AttributeKind parse_kind(const std::string& s) {
  if (s == "categorical") return AttributeKind::kCategorical;
  if (s == "ordinal") return AttributeKind::kOrdinal;
  throw ConfigError("schema: unknown attribute kind '" + s + "'");
}

std::string level_to_string(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  return j.dump();
}

}  // namespace

Schema parse_schema(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("schema: ") + e.what());
  }
  Schema schema;
  try {
    for (const auto& a : doc.at("attributes")) {
      AttributeSchema attr;
      attr.name = a.at("name").get<std::string>();
      attr.kind = parse_kind(a.value("kind", std::string("categorical")));
      for (const auto& lv : a.at("levels")) attr.levels.push_back(level_to_string(lv));
      schema.attributes.push_back(std::move(attr));
    }
    schema.label_column = doc.value("label_column", std::string("label"));
    if (doc.contains("positive_label")) schema.positive_label = level_to_string(doc.at("positive_label"));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("schema: ") + e.what());
  }
  schema.validate();
  return schema;
}

Schema load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open schema file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_schema(ss.str());
}

std::string schema_to_json(const Schema& schema) {
  json doc;
  doc["attributes"] = json::array();
  for (const auto& a : schema.attributes) {
    doc["attributes"].push_back(
        {{"name", a.name}, {"kind", a.kind == AttributeKind::kOrdinal ? "ordinal" : "categorical"}, {"levels", a.levels}});
  }
  doc["label_column"] = schema.label_column;
  doc["positive_label"] = schema.positive_label;
  return doc.dump();
}

std::string_view to_string(TestKind kind) {
  switch (kind) {
    case TestKind::kEq: return "eq";
    case TestKind::kNeq: return "neq";
    case TestKind::kGeq: return "geq";
    case TestKind::kLeq: return "leq";
  }
  return "?";
}

std::optional<TestKind> parse_test_kind(std::string_view text) {
  if (text == "eq" || text == "=") return TestKind::kEq;
  if (text == "neq" || text == "!=") return TestKind::kNeq;
  if (text == "geq" || text == ">=") return TestKind::kGeq;
  if (text == "leq" || text == "<=") return TestKind::kLeq;
  return std::nullopt;
}

bool Literal::valid_for(const Schema& schema) const {
  if (attribute >= schema.attributes.size()) return false;
  const auto& attr = schema.attributes[attribute];
  if (level >= attr.levels.size()) return false;
  const bool equality = test == TestKind::kEq || test == TestKind::kNeq;
  return equality == (attr.kind == AttributeKind::kCategorical);
}

std::string Literal::render(const Schema& schema) const {
  static constexpr const char* kOps[] = {" = ", " != ", " >= ", " <= "};
  const auto& attr = schema.attributes.at(attribute);
  return attr.name + kOps[static_cast<int>(test)] + attr.levels.at(level);
}

bool literals_conflict(const Literal& a, const Literal& b) {
  if (a.attribute != b.attribute) return false;
  if (a.test == b.test) return true;
  const bool eq_neq = (a.test == TestKind::kEq && b.test == TestKind::kNeq) ||
                      (a.test == TestKind::kNeq && b.test == TestKind::kEq);
  return eq_neq && a.level == b.level;
}

std::size_t Table::num_missing() const {
  std::size_t n = 0;
  for (const auto& row : cells) n += static_cast<std::size_t>(std::count(row.begin(), row.end(), kMissing));
  return n;
}

Table Table::select(std::span<const std::size_t> rows) const {
  Table out;
  out.schema = schema;
  out.cells.reserve(rows.size());
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) {
    out.cells.push_back(cells.at(r));
    out.labels.push_back(labels.at(r));
  }
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Splits one CSV line. Double-quoted fields may contain commas; "" escapes a
// quote inside a quoted field.
std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.emplace_back(trim(cur));
  return fields;
}

Table parse_csv_impl(std::string_view text, const Schema& schema, std::string_view label_column,
                     std::string_view positive_label) {
  schema.validate();
  Table table;
  table.schema = schema;
  table.schema.label_column = std::string(label_column);
  table.schema.positive_label = std::string(positive_label);

  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto next_line = [&](std::string_view& out) {
    while (pos < text.size()) {
      const std::size_t end = std::min(text.find('\n', pos), text.size());
      out = trim(text.substr(pos, end - pos));
      pos = end + 1;
      ++line_no;
      if (!out.empty()) return true;
    }
    return false;
  };

  std::string_view line;
  if (!next_line(line)) throw DataError("csv: empty input");
  const auto header = split_csv_line(line);
  std::vector<std::optional<std::size_t>> column_attr(header.size());
  std::optional<std::size_t> label_col;
  std::vector<bool> seen(schema.attributes.size(), false);
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == label_column) {
      label_col = c;
      continue;
    }
    const auto a = schema.attribute_index(header[c]);
    if (!a) throw DataError("csv: unknown column '" + header[c] + "'");
    if (seen[*a]) throw DataError("csv: duplicate column '" + header[c] + "'");
    seen[*a] = true;
    column_attr[c] = a;
  }
  if (!label_col) throw DataError("csv: label column '" + std::string(label_column) + "' not found");
  for (std::size_t a = 0; a < seen.size(); ++a) {
    if (!seen[a]) throw DataError("csv: schema attribute '" + schema.attributes[a].name + "' missing from header");
  }

  while (next_line(line)) {
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw DataError("csv: row " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                      " fields, expected " + std::to_string(header.size()));
    }
    std::vector<std::int32_t> row(schema.attributes.size(), kMissing);
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (c == *label_col) continue;
      const std::size_t a = *column_attr[c];
      const std::string& cell = fields[c];
      if (cell.empty() || cell == "?") continue;
      const auto lv = schema.attributes[a].level_index(cell);
      if (!lv) {
        throw DataError("csv: row " + std::to_string(line_no) + ", column '" + header[c] + "': level '" + cell +
                        "' not in schema");
      }
      row[a] = static_cast<std::int32_t>(*lv);
    }
    const std::string& label = fields[*label_col];
    if (label.empty() || label == "?") throw DataError("csv: row " + std::to_string(line_no) + ": missing label");
    table.cells.push_back(std::move(row));
    table.labels.push_back(label == positive_label ? 1 : 0);
  }
  return table;
}

}  // namespace

Table parse_csv(std::string_view text, const Schema& schema) {
  return parse_csv_impl(text, schema, schema.label_column, schema.positive_label);
}

Table load_csv(const std::filesystem::path& path, const Schema& schema, std::string_view label_column,
               std::string_view positive_label) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open data file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv_impl(ss.str(), schema, label_column, positive_label);
}

Table load_csv(const std::filesystem::path& path, const Schema& schema) {
  return load_csv(path, schema, schema.label_column, schema.positive_label);
}

std::vector<Literal> expand_literals(const Schema& schema) {
  std::vector<Literal> out;
  for (std::uint32_t a = 0; a < schema.attributes.size(); ++a) {
    const auto& attr = schema.attributes[a];
    const auto k = static_cast<std::uint32_t>(attr.levels.size());
    const TestKind first = attr.kind == AttributeKind::kCategorical ? TestKind::kEq : TestKind::kGeq;
    const TestKind second = attr.kind == AttributeKind::kCategorical ? TestKind::kNeq : TestKind::kLeq;
    for (std::uint32_t l = 0; l < k; ++l) out.push_back({a, first, l});
    for (std::uint32_t l = 0; l < k; ++l) out.push_back({a, second, l});
  }
  return out;
}

DatasetIndex::DatasetIndex(Schema schema, std::vector<Literal> universe, std::vector<Bitset> coverage, Bitset labels)
    : schema_(std::move(schema)),
      universe_(std::move(universe)),
      coverage_(std::move(coverage)),
      labels_(std::move(labels)),
      negatives_(~labels_),
      n_pos_(labels_.count()) {
  if (coverage_.size() != universe_.size()) throw ModelError("index: coverage/universe size mismatch");
  for (const auto& c : coverage_) {
    if (c.size() != labels_.size()) throw ModelError("index: coverage length mismatch");
  }
  if (!std::is_sorted(universe_.begin(), universe_.end())) throw ModelError("index: universe not in canonical order");
}

std::optional<std::size_t> DatasetIndex::literal_id(const Literal& lit) const {
  const auto it = std::lower_bound(universe_.begin(), universe_.end(), lit);
  if (it == universe_.end() || *it != lit) return std::nullopt;
  return static_cast<std::size_t>(it - universe_.begin());
}

DatasetIndex build_index(const Table& table, std::vector<Literal> universe) {
  std::sort(universe.begin(), universe.end());
  universe.erase(std::unique(universe.begin(), universe.end()), universe.end());
  const std::size_t n = table.num_records();
  std::vector<Bitset> coverage;
  coverage.reserve(universe.size());
  for (const auto& lit : universe) {
    if (!lit.valid_for(table.schema)) throw ModelError("index: literal not valid for schema");
    Bitset bits(n);
    for (std::size_t r = 0; r < n; ++r) {
      const std::int32_t v = table.cells[r][lit.attribute];
      if (v != kMissing && lit.satisfied_by(static_cast<std::uint32_t>(v))) bits.set(r);
    }
    coverage.push_back(std::move(bits));
  }
  Bitset labels(n);
  for (std::size_t r = 0; r < n; ++r) {
    if (table.labels[r] != 0) labels.set(r);
  }
  return DatasetIndex(table.schema, std::move(universe), std::move(coverage), std::move(labels));
}

std::string fingerprint_bytes(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fingerprint_file(const std::filesystem::path& path) { return fingerprint_bytes(read_file(path)); }

}  // namespace boa
