#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "boa/config.hpp"
#include "boa/data.hpp"
#include "boa/infer.hpp"
#include "boa/patterns.hpp"

namespace boa {

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  LikelihoodHyper hyper;
};

// Area under the Pareto upper envelope of `points` plus (0,0) and (1,1),
// joined by straight segments.
double auc(std::span<const RocPoint> points);

// alpha_pos x beta_neg over {1, 10, 100, 1000}, beta_pos = alpha_neg = 1.
std::vector<LikelihoodHyper> default_hyper_grid();

struct Metrics {
  ConfusionCounts confusion;
  double accuracy = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
};

Metrics metrics_from(const ConfusionCounts& c);
// Rebinds `set` to `index` and scores it. Throws ModelError when a literal
// is not part of the index universe.
Metrics evaluate_fixed(const PatternSet& set, const DatasetIndex& index);

struct KFoldConfig {
  std::size_t k = 5;
  std::vector<LikelihoodHyper> grid;  // empty: default_hyper_grid()
  double label_noise = 0.0;           // fraction of training labels flipped
  std::uint64_t seed = 0;
  std::size_t threads = 0;

  void validate() const;
};

struct FoldResult {
  std::size_t fold = 0;
  bool skipped = false;
  std::string note;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::vector<RocPoint> points;  // one per grid entry
  std::vector<std::size_t> model_sizes;
  double auc = 0.0;
};

struct KFoldResult {
  std::vector<FoldResult> folds;
  std::size_t used_folds = 0;
  double mean_auc = 0.0;
  double std_auc = 0.0;  // sample std over the used folds
};

// Trains one MAP model per (fold, grid entry) with `config`, overriding its
// likelihood hyperparameters and seed. Folds whose training or test part
// holds a single class are skipped and reported.
KFoldResult kfold_auc(const Table& table, const ModelConfig& config, const KFoldConfig& kf);

struct SimSpec {
  std::size_t records = 2000;    // N
  std::size_t candidates = 1000; // M
  std::size_t planted = 5;       // m
  double density = 0.1;
  std::vector<std::size_t> checkpoints{5000, 10000, 20000};
  std::size_t replicates = 30;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PlantedInstance {
  DatasetIndex index;  // one binary column per candidate, literal "c_j = 1"
  MinedPool pool;      // every candidate as a length-1 pattern
  PatternSet truth;
};

PlantedInstance generate_planted(const SimSpec& spec, Rng& rng);

struct SimulationRow {
  std::size_t replicate = 0;
  std::size_t checkpoint = 0;
  std::size_t edit_distance = 0;
  double energy = 0.0;
  double seconds = 0.0;
};

struct SimulationSummary {
  std::size_t checkpoint = 0;
  double mean_edit_distance = 0.0;
  double std_edit_distance = 0.0;
  double mean_seconds = 0.0;
};

struct SimulationResult {
  std::vector<SimulationRow> rows;
  std::vector<SimulationSummary> summary;
};

// Pattern-level search with a flat prior on fresh planted instances. `sa`
// supplies the schedule; its seed, checkpoints and step budget are replaced
// from the spec. `threads` runs replicates side by side.
SimulationResult simulation_study(const SimSpec& spec, SAConfig sa, const LikelihoodHyper& likelihood = {},
                                  std::size_t threads = 0);

struct RuntimeRow {
  std::size_t iterations = 0;
  double seconds = 0.0;
  double mean_edit_distance = 0.0;
};

std::vector<RuntimeRow> runtime_report(const SimulationResult& result);

}  // namespace boa
