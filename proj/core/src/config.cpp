#include "boa/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <string>

#include "boa/errors.hpp"

namespace boa {

using json = nlohmann::json;

namespace {

void check_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError("config: '" + std::string(where) + "' must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("config: unknown key '" + key + "' in '" + std::string(where) + "'");
    }
  }
}

template <class T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config: bad value for '") + key + "'");
  }
}

template <class T>
void read_optional(const json& obj, const char* key, std::optional<T>& out) {
  if (!obj.contains(key)) return;
  if (obj.at(key).is_null()) {
    out.reset();
    return;
  }
  T v{};
  read(obj, key, v);
  out = v;
}

std::vector<double> broadcast(const std::vector<double>& v, std::size_t n, const char* what) {
  if (v.size() == 1) return std::vector<double>(n, v[0]);
  if (v.size() != n) throw ConfigError(std::string("config: ") + what + " needs 1 or " + std::to_string(n) + " values");
  return v;
}

}  // namespace

void ModelConfig::validate() const {
  likelihood.validate();
  PoissonHyper{lambda_m, lambda_l, {}}.validate();
  mining.validate();
  search.validate();
  for (const auto* v : {&bb_alpha, &bb_beta}) {
    if (!*v) continue;
    if ((*v)->empty()) throw ConfigError("config: betabinomial overrides may not be empty");
    for (double x : **v) {
      if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError("config: betabinomial values must be positive");
    }
  }
}

json to_json(const ModelConfig& c) {
  json j;
  j["prior"] = std::string(to_string(c.prior));
  j["likelihood"] = {{"alpha_pos", c.likelihood.alpha_pos},
                     {"beta_pos", c.likelihood.beta_pos},
                     {"alpha_neg", c.likelihood.alpha_neg},
                     {"beta_neg", c.likelihood.beta_neg}};
  j["betabinomial"] = {{"alpha", c.bb_alpha ? json(*c.bb_alpha) : json(nullptr)},
                       {"beta", c.bb_beta ? json(*c.bb_beta) : json(nullptr)}};
  j["poisson"] = {{"lambda_m", c.lambda_m}, {"lambda_l", c.lambda_l}};
  j["mining"] = {{"min_support", c.mining.min_support_fraction},
                 {"min_support_count", c.mining.min_support_count ? json(*c.mining.min_support_count) : json(nullptr)},
                 {"max_length", c.mining.max_length},
                 {"top_k", c.mining.top_k ? json(*c.mining.top_k) : json(nullptr)},
                 {"negative_literals", c.mining.include_negative_literals}};
  j["search"] = {{"level", std::string(to_string(c.search.level))},
                 {"max_steps", c.search.max_steps},
                 {"explore_p", c.search.explore_p},
                 {"restarts", c.search.restarts},
                 {"t0", c.search.t0},
                 {"seed", c.search.seed},
                 {"checkpoints", c.search.checkpoints}};
  j["apply_support_bound"] = c.apply_support_bound;
  return j;
}

ModelConfig model_config_from_json(const json& doc, ModelConfig c) {
  check_keys(doc, "config", {"prior", "likelihood", "betabinomial", "poisson", "mining", "search", "apply_support_bound"});
  if (doc.contains("prior")) {
    std::string p;
    read(doc, "prior", p);
    c.prior = parse_prior_kind(p);
  }
  if (doc.contains("likelihood")) {
    const auto& l = doc.at("likelihood");
    check_keys(l, "likelihood", {"alpha_pos", "beta_pos", "alpha_neg", "beta_neg"});
    read(l, "alpha_pos", c.likelihood.alpha_pos);
    read(l, "beta_pos", c.likelihood.beta_pos);
    read(l, "alpha_neg", c.likelihood.alpha_neg);
    read(l, "beta_neg", c.likelihood.beta_neg);
  }
  if (doc.contains("betabinomial")) {
    const auto& b = doc.at("betabinomial");
    check_keys(b, "betabinomial", {"alpha", "beta"});
    for (auto [key, target] : {std::pair{"alpha", &c.bb_alpha}, std::pair{"beta", &c.bb_beta}}) {
      if (!b.contains(key)) continue;
      const auto& v = b.at(key);
      if (v.is_null()) {
        target->reset();
      } else if (v.is_number()) {
        *target = std::vector<double>{v.get<double>()};
      } else {
        read_optional(b, key, *target);
      }
    }
  }
  if (doc.contains("poisson")) {
    const auto& p = doc.at("poisson");
    check_keys(p, "poisson", {"lambda_m", "lambda_l"});
    read(p, "lambda_m", c.lambda_m);
    read(p, "lambda_l", c.lambda_l);
  }
  if (doc.contains("mining")) {
    const auto& m = doc.at("mining");
    check_keys(m, "mining", {"min_support", "min_support_count", "max_length", "top_k", "negative_literals"});
    read(m, "min_support", c.mining.min_support_fraction);
    read_optional(m, "min_support_count", c.mining.min_support_count);
    read(m, "max_length", c.mining.max_length);
    read_optional(m, "top_k", c.mining.top_k);
    read(m, "negative_literals", c.mining.include_negative_literals);
  }
  if (doc.contains("search")) {
    const auto& s = doc.at("search");
    check_keys(s, "search", {"level", "max_steps", "explore_p", "restarts", "t0", "seed", "checkpoints"});
    if (s.contains("level")) {
      std::string level;
      read(s, "level", level);
      c.search.level = parse_search_level(level);
    }
    read(s, "max_steps", c.search.max_steps);
    read(s, "explore_p", c.search.explore_p);
    read(s, "restarts", c.search.restarts);
    read(s, "t0", c.search.t0);
    read(s, "seed", c.search.seed);
    read(s, "checkpoints", c.search.checkpoints);
  }
  read(doc, "apply_support_bound", c.apply_support_bound);
  c.validate();
  return c;
}

ModelConfig load_model_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file is not valid JSON: " + path.string() + ": " + e.what());
  }
  return model_config_from_json(doc);
}

ModelParams resolve_params(const ModelConfig& c, const DatasetIndex& index, const MinedPool* pool) {
  ModelParams p;
  p.prior = c.prior;
  p.likelihood = c.likelihood;
  p.poisson = PoissonHyper::for_schema(index.schema(), c.lambda_m, c.lambda_l);
  std::vector<std::size_t> sizes;
  if (c.search.level == SearchLevel::kPattern && pool != nullptr) {
    sizes = pool->pool_sizes();
    sizes.resize(std::max(sizes.size(), c.mining.max_length), 0);
  } else {
    sizes = count_conjunctions(index.universe(), c.mining.max_length);
  }
  p.betabinomial = BetaBinomialHyper::defaults(sizes);
  if (c.bb_alpha) p.betabinomial.alpha = broadcast(*c.bb_alpha, sizes.size(), "betabinomial alpha");
  if (c.bb_beta) p.betabinomial.beta = broadcast(*c.bb_beta, sizes.size(), "betabinomial beta");
  p.betabinomial.validate();
  return p;
}

FitResult fit_with_pool(const DatasetIndex& index, const ModelConfig& config, MinedPool pool) {
  config.validate();
  FitResult r;
  const bool pattern_level = config.search.level == SearchLevel::kPattern;
  r.mined_size = pool.size();
  r.params = resolve_params(config, index, pattern_level ? &pool : nullptr);
  r.bounds = bound_report(r.params, index.num_positive(), index.num_negative());
  if (pattern_level && config.apply_support_bound) {
    if (const auto c = r.bounds.min_support_C(); c && *c > 0) {
      r.support_threshold = *c;
      pool = filter_support_all(std::move(pool), *c);
    }
  }
  SAConfig sa = config.search;
  sa.literal_max_length = config.mining.max_length;
  if (pattern_level && pool.empty()) {
    r.search.score = score(PatternSet{}, index, r.params);
  } else {
    r.search = sa_search(index, pattern_level ? &pool : nullptr, r.params, sa);
  }
  r.pool = std::move(pool);
  r.bounds = bound_report(r.params, index.num_positive(), index.num_negative(), r.bounds.delta,
                          r.search.score.log_likelihood);
  return r;
}

FitResult fit(const DatasetIndex& index, const ModelConfig& config) {
  config.validate();
  MinedPool pool;
  if (config.search.level == SearchLevel::kPattern) pool = mine_pool(index, config.mining);
  return fit_with_pool(index, config, std::move(pool));
}

}  // namespace boa
