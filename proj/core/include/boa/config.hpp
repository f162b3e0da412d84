#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "boa/bounds.hpp"
#include "boa/infer.hpp"
#include "boa/mining.hpp"
#include "boa/model.hpp"

namespace boa {

// Everything a training run needs: prior choice, hyperparameters, mining
// thresholds and the annealing schedule.
struct ModelConfig {
  PriorKind prior = PriorKind::kBetaBinomial;
  LikelihoodHyper likelihood;
  // Per-length overrides for the Beta-Binomial prior. One value applies to
  // every length. Unset: alpha_l = 1, beta_l = |pool_l|.
  std::optional<std::vector<double>> bb_alpha;
  std::optional<std::vector<double>> bb_beta;
  double lambda_m = 3.0;
  double lambda_l = 2.0;
  MiningConfig mining;
  SAConfig search;
  // Drop pool patterns with supp_S below the minimum-support bound when
  // that bound applies.
  bool apply_support_bound = true;

  void validate() const;
};

nlohmann::json to_json(const ModelConfig& config);
// Reads the keys present in `doc` over `base`. Unknown keys are a ConfigError.
ModelConfig model_config_from_json(const nlohmann::json& doc, ModelConfig base = {});
ModelConfig load_model_config(const std::filesystem::path& path);

// Binds the hyperparameters to a dataset. Beta-Binomial pool sizes come from
// `pool` at pattern level and from the full conjunction count at literal level.
ModelParams resolve_params(const ModelConfig& config, const DatasetIndex& index, const MinedPool* pool);

struct FitResult {
  MinedPool pool;            // the pool the search ran over (empty at literal level)
  std::size_t mined_size = 0;
  ModelParams params;
  BoundReport bounds;
  std::size_t support_threshold = 0;  // on supp_S, 0 when no support filter ran
  SearchResult search;
};

// Mine (pattern level), bound, filter and search.
FitResult fit(const DatasetIndex& index, const ModelConfig& config);
// Same, reusing an already mined pool.
FitResult fit_with_pool(const DatasetIndex& index, const ModelConfig& config, MinedPool pool);

}  // namespace boa
