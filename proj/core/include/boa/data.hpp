#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "boa/bitset.hpp"

namespace boa {

enum class AttributeKind : std::uint8_t { kCategorical, kOrdinal };

struct AttributeSchema {
  std::string name;
  AttributeKind kind = AttributeKind::kCategorical;
  // Ordinal: ascending order. Categorical: order only fixes literal ids.
  std::vector<std::string> levels;

  std::optional<std::uint32_t> level_index(std::string_view label) const;
};

struct Schema {
  std::vector<AttributeSchema> attributes;
  std::string label_column = "label";
  std::string positive_label = "1";

  std::size_t num_attributes() const { return attributes.size(); }
  std::optional<std::size_t> attribute_index(std::string_view name) const;
  // Throws ConfigError on empty or duplicate levels and duplicate names.
  void validate() const;
};

Schema load_schema(const std::filesystem::path& path);
Schema parse_schema(std::string_view json_text);
std::string schema_to_json(const Schema& schema);

enum class TestKind : std::uint8_t { kEq = 0, kNeq = 1, kGeq = 2, kLeq = 3 };

std::string_view to_string(TestKind kind);
std::optional<TestKind> parse_test_kind(std::string_view text);

// One attribute-value test. Ordering is (attribute, test kind, level), the
// canonical literal order.
struct Literal {
  std::uint32_t attribute = 0;
  TestKind test = TestKind::kEq;
  std::uint32_t level = 0;

  auto operator<=>(const Literal&) const = default;

  bool satisfied_by(std::uint32_t value_level) const {
    switch (test) {
      case TestKind::kEq: return value_level == level;
      case TestKind::kNeq: return value_level != level;
      case TestKind::kGeq: return value_level >= level;
      case TestKind::kLeq: return value_level <= level;
    }
    return false;
  }

  // Eq/Neq on categorical attributes, Geq/Leq on ordinal ones, level in range.
  bool valid_for(const Schema& schema) const;
  std::string render(const Schema& schema) const;
};

// Two literals may not share a conjunction when they test the same attribute
// with the same test kind, or are Eq/Neq of the same level.
bool literals_conflict(const Literal& a, const Literal& b);

inline constexpr std::int32_t kMissing = -1;

// Records decoded against a schema. cells[r][j] is a level index or kMissing.
struct Table {
  Schema schema;
  std::vector<std::vector<std::int32_t>> cells;
  std::vector<std::uint8_t> labels;

  std::size_t num_records() const { return cells.size(); }
  std::size_t num_missing() const;
  Table select(std::span<const std::size_t> rows) const;
};

// Reads a header-first CSV. "?" and empty cells are missing. Any level not
// in the schema is a DataError naming the row and column.
Table load_csv(const std::filesystem::path& path, const Schema& schema);
Table load_csv(const std::filesystem::path& path, const Schema& schema, std::string_view label_column,
               std::string_view positive_label);
Table parse_csv(std::string_view text, const Schema& schema);

// For each categorical attribute with K levels: K Eq then K Neq literals;
// for each ordinal attribute: K Geq then K Leq. Sorted canonically.
std::vector<Literal> expand_literals(const Schema& schema);

// Binarized dataset: one coverage bitset per literal plus the label bitset.
// Immutable once built.
class DatasetIndex {
 public:
  DatasetIndex() = default;
  DatasetIndex(Schema schema, std::vector<Literal> universe, std::vector<Bitset> coverage, Bitset labels);

  std::size_t num_records() const { return labels_.size(); }
  std::size_t num_positive() const { return n_pos_; }
  std::size_t num_negative() const { return num_records() - n_pos_; }
  std::size_t num_attributes() const { return schema_.num_attributes(); }
  std::size_t num_levels(std::size_t attribute) const { return schema_.attributes[attribute].levels.size(); }

  const Schema& schema() const { return schema_; }
  std::span<const Literal> universe() const { return universe_; }
  const Bitset& coverage(std::size_t literal_id) const { return coverage_[literal_id]; }
  const Bitset& labels() const { return labels_; }
  const Bitset& negatives() const { return negatives_; }

  std::optional<std::size_t> literal_id(const Literal& lit) const;

 private:
  Schema schema_;
  std::vector<Literal> universe_;
  std::vector<Bitset> coverage_;
  Bitset labels_;
  Bitset negatives_;
  std::size_t n_pos_ = 0;
};

DatasetIndex build_index(const Table& table, std::vector<Literal> universe);
inline DatasetIndex build_index(const Table& table) { return build_index(table, expand_literals(table.schema)); }

// FNV-1a 64 over raw bytes, rendered as 16 hex digits.
std::string fingerprint_bytes(std::string_view bytes);
std::string fingerprint_file(const std::filesystem::path& path);
std::string read_file(const std::filesystem::path& path);

}  // namespace boa
