#include "boa/mining.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "boa/errors.hpp"

namespace boa {

void MiningConfig::validate() const {
  if (!min_support_count && !(min_support_fraction > 0.0 && min_support_fraction <= 1.0)) {
    throw ConfigError("mining: min_support_fraction must be in (0, 1]");
  }
  if (max_length < 1) throw ConfigError("mining: max_length must be >= 1");
  if (top_k && *top_k < 1) throw ConfigError("mining: top_k must be >= 1");
}

std::size_t MiningConfig::threshold(std::size_t n_pos) const {
  if (min_support_count) return std::max<std::size_t>(*min_support_count, 1);
  // Guard against 0.05 * 20 evaluating to 1.0000000000000002.
  const double raw = min_support_fraction * static_cast<double>(n_pos);
  const auto t = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  return std::max<std::size_t>(t, 1);
}

std::vector<std::size_t> MinedPool::pool_sizes() const {
  std::vector<std::size_t> sizes(max_length, 0);
  for (const auto& mp : patterns) {
    const std::size_t l = mp.pattern.length();
    if (l >= 1 && l <= max_length) ++sizes[l - 1];
  }
  return sizes;
}

std::vector<Pattern> MinedPool::pattern_list() const {
  std::vector<Pattern> out;
  out.reserve(patterns.size());
  for (const auto& mp : patterns) out.push_back(mp.pattern);
  return out;
}

bool MinedPool::contains(const Pattern& p) const {
  return std::ranges::binary_search(
      patterns, p, [](const Pattern& a, const Pattern& b) { return a < b; }, &MinedPattern::pattern);
}

namespace {

double binary_entropy(std::size_t k, std::size_t n) {
  if (n == 0 || k == 0 || k == n) return 0.0;
  const double p = static_cast<double>(k) / static_cast<double>(n);
  return -(p * std::log2(p) + (1.0 - p) * std::log2(1.0 - p));
}

}  // namespace

double label_entropy(const DatasetIndex& index) { return binary_entropy(index.num_positive(), index.num_records()); }

double conditional_entropy(const Bitset& coverage, const DatasetIndex& index) {
  const std::size_t n = index.num_records();
  if (n == 0) return 0.0;
  const std::size_t covered = coverage.count();
  const std::size_t covered_pos = count_and(coverage, index.labels());
  const std::size_t rest = n - covered;
  const std::size_t rest_pos = index.num_positive() - covered_pos;
  const double w = static_cast<double>(covered) / static_cast<double>(n);
  return w * binary_entropy(covered_pos, covered) + (1.0 - w) * binary_entropy(rest_pos, rest);
}

MinedPattern describe(Pattern pattern, const DatasetIndex& index) {
  MinedPattern mp;
  mp.support_all = pattern.coverage().count();
  mp.support_pos = count_and(pattern.coverage(), index.labels());
  const std::size_t pos = index.num_positive();
  const std::size_t neg = index.num_negative();
  mp.tpr = pos == 0 ? 0.0 : static_cast<double>(mp.support_pos) / static_cast<double>(pos);
  mp.fpr = neg == 0 ? 0.0 : static_cast<double>(mp.support_all - mp.support_pos) / static_cast<double>(neg);
  mp.cond_entropy = conditional_entropy(pattern.coverage(), index);
  mp.pattern = std::move(pattern);
  return mp;
}

namespace {

// FP-tree over item ids 0..n_items-1 (ids are ranks: 0 = most frequent).
class FpTree {
 public:
  struct Node {
    std::uint32_t item;
    std::uint32_t count;
    std::int32_t parent;
    std::int32_t first_child = -1;
    std::int32_t next_sibling = -1;
    std::int32_t next_same = -1;
  };

  explicit FpTree(std::size_t n_items) : heads_(n_items, -1), totals_(n_items, 0) {
    nodes_.push_back({UINT32_MAX, 0, -1});
  }

  // items must be sorted by ascending rank.
  void insert(std::span<const std::uint32_t> items, std::uint32_t weight) {
    std::int32_t cur = 0;
    for (std::uint32_t item : items) {
      std::int32_t child = nodes_[cur].first_child;
      while (child != -1 && nodes_[child].item != item) child = nodes_[child].next_sibling;
      if (child == -1) {
        child = static_cast<std::int32_t>(nodes_.size());
        nodes_.push_back({item, 0, cur});
        nodes_[child].next_sibling = nodes_[cur].first_child;
        nodes_[cur].first_child = child;
        nodes_[child].next_same = heads_[item];
        heads_[item] = child;
      }
      nodes_[child].count += weight;
      totals_[item] += weight;
      cur = child;
    }
  }

  std::size_t num_items() const { return heads_.size(); }
  std::uint64_t total(std::uint32_t item) const { return totals_[item]; }
  std::int32_t head(std::uint32_t item) const { return heads_[item]; }
  const Node& node(std::int32_t i) const { return nodes_[static_cast<std::size_t>(i)]; }

 private:
  std::vector<Node> nodes_;
  std::vector<std::int32_t> heads_;
  std::vector<std::uint64_t> totals_;
};

struct Miner {
  const std::vector<Literal>& literals;  // by global literal id
  std::size_t threshold;
  std::size_t max_length;
  std::vector<std::pair<std::vector<std::size_t>, std::size_t>> found;

  bool conflicts_with(std::size_t lit, const std::vector<std::size_t>& suffix) const {
    for (std::size_t s : suffix) {
      if (literals_conflict(literals[lit], literals[s])) return true;
    }
    return false;
  }

  // tree items are local ranks; rank_to_lit maps them back to literal ids.
  void mine(const FpTree& tree, const std::vector<std::size_t>& rank_to_lit, std::vector<std::size_t>& suffix) {
    for (std::size_t r = tree.num_items(); r-- > 0;) {
      const auto item = static_cast<std::uint32_t>(r);
      const std::uint64_t supp = tree.total(item);
      if (supp < threshold) continue;
      const std::size_t lit = rank_to_lit[r];
      suffix.push_back(lit);
      found.emplace_back(suffix, static_cast<std::size_t>(supp));
      if (suffix.size() < max_length) grow(tree, rank_to_lit, item, suffix);
      suffix.pop_back();
    }
  }

  void grow(const FpTree& tree, const std::vector<std::size_t>& rank_to_lit, std::uint32_t item,
            std::vector<std::size_t>& suffix) {
    // Conditional pattern base: prefix paths of every node carrying `item`.
    std::vector<std::pair<std::vector<std::uint32_t>, std::uint32_t>> base;
    std::vector<std::uint64_t> counts(tree.num_items(), 0);
    for (std::int32_t n = tree.head(item); n != -1; n = tree.node(n).next_same) {
      std::vector<std::uint32_t> path;
      for (std::int32_t p = tree.node(n).parent; p > 0; p = tree.node(p).parent) {
        const std::uint32_t it = tree.node(p).item;
        if (conflicts_with(rank_to_lit[it], suffix)) continue;
        path.push_back(it);
      }
      if (path.empty()) continue;
      const std::uint32_t w = tree.node(n).count;
      for (std::uint32_t it : path) counts[it] += w;
      base.emplace_back(std::move(path), w);
    }
    // Conditional tree order: descending conditional frequency, ties by
    // canonical literal order.
    std::vector<std::uint32_t> keep;
    for (std::uint32_t it = 0; it < counts.size(); ++it) {
      if (counts[it] >= threshold) keep.push_back(it);
    }
    if (keep.empty()) return;
    std::sort(keep.begin(), keep.end(), [&](std::uint32_t a, std::uint32_t b) {
      if (counts[a] != counts[b]) return counts[a] > counts[b];
      return rank_to_lit[a] < rank_to_lit[b];
    });
    std::vector<std::int64_t> new_rank(tree.num_items(), -1);
    std::vector<std::size_t> sub_rank_to_lit(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) {
      new_rank[keep[i]] = static_cast<std::int64_t>(i);
      sub_rank_to_lit[i] = rank_to_lit[keep[i]];
    }
    FpTree sub(keep.size());
    std::vector<std::uint32_t> items;
    for (const auto& [path, w] : base) {
      items.clear();
      for (std::uint32_t it : path) {
        if (new_rank[it] >= 0) items.push_back(static_cast<std::uint32_t>(new_rank[it]));
      }
      if (items.empty()) continue;
      std::sort(items.begin(), items.end());
      sub.insert(items, w);
    }
    mine(sub, sub_rank_to_lit, suffix);
  }
};

}  // namespace

MinedPool mine_frequent(const DatasetIndex& index, const MiningConfig& config) {
  config.validate();
  if (index.num_positive() == 0) throw DataError("mining: no positive records");
  const std::size_t threshold = config.threshold(index.num_positive());
  const auto universe = index.universe();
  const std::vector<Literal> literals(universe.begin(), universe.end());

  // Frequent single items on S+.
  std::vector<std::size_t> freq(literals.size(), 0);
  std::vector<std::size_t> items;
  for (std::size_t id = 0; id < literals.size(); ++id) {
    if (!config.include_negative_literals && literals[id].test == TestKind::kNeq) continue;
    freq[id] = count_and(index.coverage(id), index.labels());
    if (freq[id] >= threshold) items.push_back(id);
  }
  std::sort(items.begin(), items.end(), [&](std::size_t a, std::size_t b) {
    if (freq[a] != freq[b]) return freq[a] > freq[b];
    return a < b;
  });
  std::vector<std::int64_t> rank(literals.size(), -1);
  for (std::size_t i = 0; i < items.size(); ++i) rank[items[i]] = static_cast<std::int64_t>(i);

  FpTree tree(items.size());
  std::vector<std::uint32_t> txn;
  index.labels().for_each_set([&](std::size_t r) {
    txn.clear();
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (index.coverage(items[i]).test(r)) txn.push_back(static_cast<std::uint32_t>(i));
    }
    if (!txn.empty()) tree.insert(txn, 1);
  });

  Miner miner{literals, threshold, config.max_length, {}};
  std::vector<std::size_t> suffix;
  miner.mine(tree, items, suffix);

  MinedPool pool;
  pool.max_length = config.max_length;
  pool.patterns.reserve(miner.found.size());
  for (auto& [ids, supp] : miner.found) {
    MinedPattern mp = describe(Pattern::from_ids(ids, index), index);
    pool.patterns.push_back(std::move(mp));
  }
  std::sort(pool.patterns.begin(), pool.patterns.end(),
            [](const MinedPattern& a, const MinedPattern& b) { return a.pattern < b.pattern; });
  pool.patterns.erase(std::unique(pool.patterns.begin(), pool.patterns.end(),
                                  [](const MinedPattern& a, const MinedPattern& b) { return a.pattern == b.pattern; }),
                      pool.patterns.end());
  return pool;
}

MinedPool roc_filter(MinedPool pool) {
  std::erase_if(pool.patterns, [](const MinedPattern& mp) { return mp.tpr < mp.fpr; });
  return pool;
}

MinedPool info_gain_screen(MinedPool pool, std::size_t top_k) {
  if (top_k < 1) throw ConfigError("info gain screen: top_k must be >= 1");
  if (pool.patterns.size() <= top_k) return pool;
  std::vector<std::size_t> order(pool.patterns.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& pa = pool.patterns[a];
    const auto& pb = pool.patterns[b];
    if (pa.cond_entropy != pb.cond_entropy) return pa.cond_entropy < pb.cond_entropy;
    return pa.pattern < pb.pattern;
  });
  order.resize(top_k);
  std::sort(order.begin(), order.end());
  MinedPool out;
  out.max_length = pool.max_length;
  out.patterns.reserve(top_k);
  for (std::size_t i : order) out.patterns.push_back(std::move(pool.patterns[i]));
  return out;
}

MinedPool filter_support_all(MinedPool pool, std::size_t min_support_all) {
  std::erase_if(pool.patterns, [&](const MinedPattern& mp) { return mp.support_all < min_support_all; });
  return pool;
}

MinedPool mine_pool(const DatasetIndex& index, const MiningConfig& config) {
  MinedPool pool = roc_filter(mine_frequent(index, config));
  if (config.top_k) pool = info_gain_screen(std::move(pool), *config.top_k);
  return pool;
}

MinedPool make_pool(std::vector<Pattern> patterns, const DatasetIndex& index, std::size_t max_length) {
  MinedPool pool;
  pool.max_length = max_length;
  for (auto& p : patterns) {
    if (p.length() > max_length) throw ModelError("pool: pattern longer than max_length");
    pool.patterns.push_back(describe(std::move(p), index));
  }
  std::sort(pool.patterns.begin(), pool.patterns.end(),
            [](const MinedPattern& a, const MinedPattern& b) { return a.pattern < b.pattern; });
  pool.patterns.erase(std::unique(pool.patterns.begin(), pool.patterns.end(),
                                  [](const MinedPattern& a, const MinedPattern& b) { return a.pattern == b.pattern; }),
                      pool.patterns.end());
  return pool;
}

nlohmann::json pool_to_json(const MinedPool& pool, const Schema& schema) {
  nlohmann::json doc;
  doc["max_length"] = pool.max_length;
  doc["schema_fingerprint"] = schema_fingerprint(schema);
  doc["patterns"] = nlohmann::json::array();
  for (const auto& mp : pool.patterns) {
    doc["patterns"].push_back({{"literals", pattern_to_json(mp.pattern, schema)},
                               {"rule", mp.pattern.render(schema)},
                               {"support_pos", mp.support_pos},
                               {"support_all", mp.support_all},
                               {"tpr", mp.tpr},
                               {"fpr", mp.fpr},
                               {"cond_entropy", mp.cond_entropy}});
  }
  return doc;
}

MinedPool pool_from_json(const nlohmann::json& doc, const DatasetIndex& index) {
  try {
    if (doc.contains("schema_fingerprint") &&
        doc.at("schema_fingerprint").get<std::string>() != schema_fingerprint(index.schema())) {
      throw DataError("pool was mined for a different schema");
    }
    std::vector<Pattern> patterns;
    for (const auto& entry : doc.at("patterns")) {
      patterns.push_back(Pattern::make(literals_from_json(entry.at("literals"), index.schema()), index));
    }
    return make_pool(std::move(patterns), index, doc.at("max_length").get<std::size_t>());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("pool file: ") + e.what());
  } catch (const ModelError& e) {
    throw DataError(std::string("pool file: ") + e.what());
  }
}

}  // namespace boa
