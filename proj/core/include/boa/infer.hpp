#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "boa/mining.hpp"
#include "boa/model.hpp"
#include "boa/rng.hpp"

namespace boa {

enum class SearchLevel { kPattern, kLiteral };

std::string_view to_string(SearchLevel level);
SearchLevel parse_search_level(std::string_view text);

enum class Action { kCoverMore, kCoverLess };

struct SAConfig {
  std::size_t max_steps = 50000;
  double explore_p = 0.1;
  std::size_t restarts = 3;
  double t0 = 1.0;
  SearchLevel level = SearchLevel::kPattern;
  std::uint64_t seed = 0;
  // Longest pattern the literal-level moves may build.
  std::size_t literal_max_length = 3;
  // Steps at which the best-so-far set is recorded (ascending).
  std::vector<std::size_t> checkpoints;
  bool record_trace = false;
  // 0 picks the default: BOA_THREADS, else the hardware concurrency.
  std::size_t threads = 0;

  void validate() const;
};

// Worker count used when a config leaves `threads` at 0.
std::size_t default_thread_count();

struct TraceRow {
  std::uint32_t chain = 0;
  std::size_t step = 0;
  double current = 0.0;
  double best = 0.0;
  bool accepted = false;
};

struct CheckpointRecord {
  std::size_t step = 0;
  PatternSet best;
  double energy = 0.0;
  double seconds = 0.0;  // wall clock of the slowest chain at this step
};

struct SearchResult {
  PatternSet best;
  Score score;
  std::vector<TraceRow> trace;                // chains concatenated in order
  std::vector<CheckpointRecord> checkpoints;  // best across chains per checkpoint
  std::vector<double> chain_energies;         // final best energy per chain
  std::vector<std::size_t> chain_steps;       // steps each chain ran
};

// Number of conjunctions of 1..max_length literals drawn from `universe`
// with no two conflicting literals. Entry l-1 counts length l.
std::vector<std::size_t> count_conjunctions(std::span<const Literal> universe, std::size_t max_length);
// All such conjunctions over the index universe, in canonical order.
std::vector<Pattern> enumerate_conjunctions(const DatasetIndex& index, std::size_t max_length);

// Simulated annealing. Pattern level searches subsets of `pool`; literal level
// searches conjunctions over the index universe and ignores `pool`. Throws
// ModelError when the pattern level is asked to search an empty pool.
SearchResult sa_search(const DatasetIndex& index, const MinedPool* pool, const ModelParams& params, const SAConfig& sa);

// One pattern-level neighbour of `current` (members must come from `pool`).
// Returns `current` when the action is impossible.
PatternSet propose_pattern_level(const PatternSet& current, Action action, const MinedPool& pool,
                                 const DatasetIndex& index, const ModelParams& params, double p, Rng& rng);
// One literal-level neighbour of `current`.
PatternSet propose_literal_level(const PatternSet& current, Action action, const DatasetIndex& index,
                                 const ModelParams& params, double p, std::size_t max_length, Rng& rng);

// M = min(Poisson(lambda_M), pool size) distinct pool patterns, or M
// distinct single-literal patterns at literal level.
PatternSet random_init(SearchLevel level, const MinedPool* pool, const DatasetIndex& index, double lambda_m, Rng& rng);

struct ExhaustiveResult {
  PatternSet best;
  Score score;
  std::size_t evaluated = 0;
};

// Upper limit on the number of subsets exhaustive_map will score.
inline constexpr std::size_t kExhaustiveLimit = 1000000;

// Exact argmin of E_S over all subsets of `candidates` with at most
// max_set_size members. Ties go to the canonically smallest set. Throws
// ConfigError when the subset count exceeds kExhaustiveLimit.
ExhaustiveResult exhaustive_map(std::span<const Pattern> candidates, const DatasetIndex& index, const ModelParams& params,
                                std::size_t max_set_size);

}  // namespace boa
