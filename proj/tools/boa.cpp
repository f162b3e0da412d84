// boa: mine, train, predict, evaluate, simulate, bounds, rerun.
//
// Every artifact carries a manifest (JSON key "manifest", or a leading
// "# manifest: {...}" line in CSV files). `boa rerun ARTIFACT --output-dir D`
// replays the command that produced it into D.

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "boa/bounds.hpp"
#include "boa/config.hpp"
#include "boa/data.hpp"
#include "boa/errors.hpp"
#include "boa/eval.hpp"
#include "boa/infer.hpp"
#include "boa/mining.hpp"
#include "boa/patterns.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kToolVersion = "0.1.0";
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void warn(const std::string& msg) { std::cerr << "boa: warning: " << msg << "\n"; }

// One command with everything needed to run it again.
struct Invocation {
  std::string command;
  json args = json::object();
  std::optional<boa::ModelConfig> config;
  std::map<std::string, fs::path> inputs;
  std::map<std::string, fs::path> outputs;
  bool record_time = false;
  std::size_t threads = 0;
};

json manifest_of(const Invocation& inv, double seconds) {
  json m;
  m["tool"] = "boa";
  m["version"] = kToolVersion;
  m["command"] = inv.command;
  m["args"] = inv.args;
  m["config"] = inv.config ? boa::to_json(*inv.config) : json(nullptr);
  json inputs = json::object();
  for (const auto& [role, path] : inv.inputs) {
    inputs[role] = {{"path", fs::absolute(path).lexically_normal().string()},
                    {"fingerprint", boa::fingerprint_file(path)}};
  }
  m["inputs"] = inputs;
  json outputs = json::object();
  for (const auto& [role, path] : inv.outputs) outputs[role] = path.filename().string();
  m["outputs"] = outputs;
  if (inv.config) {
    m["seed"] = inv.config->search.seed;
  } else if (inv.args.contains("seed")) {
    m["seed"] = inv.args["seed"];
  }
  if (inv.record_time) m["wall_clock_seconds"] = seconds;
  return m;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw boa::DataError("cannot write " + path.string());
  out << text;
  if (!out) throw boa::DataError("write failed: " + path.string());
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

std::string csv_header(const json& manifest) { return "# manifest: " + manifest.dump() + "\n"; }

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw boa::DataError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw boa::DataError(path.string() + " is not valid JSON: " + e.what());
  }
}

struct Loaded {
  boa::Table table;
  boa::DatasetIndex index;
};

Loaded load_dataset(const Invocation& inv) {
  const boa::Schema schema = boa::load_schema(inv.inputs.at("schema"));
  Loaded d;
  d.table = boa::load_csv(inv.inputs.at("data"), schema);
  d.index = boa::build_index(d.table);
  return d;
}

class Clock {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// ---------------------------------------------------------------------------

int run_mine(const Invocation& inv) {
  const Clock clock;
  const auto d = load_dataset(inv);
  const auto& cfg = inv.config->mining;
  const boa::MinedPool frequent = boa::mine_frequent(d.index, cfg);
  boa::MinedPool kept = boa::roc_filter(frequent);
  const std::size_t after_roc = kept.size();
  if (cfg.top_k) kept = boa::info_gain_screen(std::move(kept), *cfg.top_k);
  if (kept.empty()) warn("the mined pool is empty (support threshold " +
                         std::to_string(cfg.threshold(d.index.num_positive())) + " on S+)");

  json doc = boa::pool_to_json(kept, d.index.schema());
  doc["counts"] = {{"frequent", frequent.size()}, {"after_roc_filter", after_roc}, {"pool", kept.size()}};
  doc["support_threshold_pos"] = cfg.threshold(d.index.num_positive());
  doc["manifest"] = manifest_of(inv, clock.seconds());
  write_json(inv.outputs.at("pool"), doc);

  if (inv.outputs.contains("roc")) {
    std::string csv = csv_header(doc["manifest"]) + "fpr,tpr,selected,length\n";
    for (const auto& mp : frequent.patterns) {
      csv += num(mp.fpr) + "," + num(mp.tpr) + "," + (kept.contains(mp.pattern) ? "1" : "0") + "," +
             std::to_string(mp.pattern.length()) + "\n";
    }
    write_text(inv.outputs.at("roc"), csv);
  }
  std::cerr << "boa: " << frequent.size() << " frequent, " << after_roc << " after ROC filter, " << kept.size()
            << " in pool\n";
  return 0;
}

json score_json(const boa::Score& s) {
  return {{"log_prior", s.log_prior},
          {"log_likelihood", s.log_likelihood},
          {"log_joint", s.log_joint},
          {"confusion", {{"tp", s.confusion.tp}, {"fp", s.confusion.fp}, {"tn", s.confusion.tn}, {"fn", s.confusion.fn}}}};
}

json params_json(const boa::ModelParams& p) {
  return {{"prior", std::string(boa::to_string(p.prior))},
          {"likelihood",
           {{"alpha_pos", p.likelihood.alpha_pos},
            {"beta_pos", p.likelihood.beta_pos},
            {"alpha_neg", p.likelihood.alpha_neg},
            {"beta_neg", p.likelihood.beta_neg}}},
          {"betabinomial",
           {{"alpha", p.betabinomial.alpha}, {"beta", p.betabinomial.beta}, {"pool_sizes", p.betabinomial.pool_sizes}}},
          {"poisson", {{"lambda_m", p.poisson.lambda_m}, {"lambda_l", p.poisson.lambda_l}, {"levels", p.poisson.levels}}}};
}

int run_train(const Invocation& inv) {
  const Clock clock;
  const auto d = load_dataset(inv);
  boa::ModelConfig cfg = *inv.config;
  cfg.search.threads = inv.threads;
  cfg.search.record_trace = inv.outputs.contains("trace");

  boa::FitResult fit;
  if (cfg.search.level == boa::SearchLevel::kPattern) {
    boa::MinedPool pool = boa::pool_from_json(read_json(inv.inputs.at("pool")), d.index);
    if (pool.max_length > cfg.mining.max_length) cfg.mining.max_length = pool.max_length;
    if (pool.empty()) warn("the pool is empty; the model will be the empty set");
    fit = boa::fit_with_pool(d.index, cfg, std::move(pool));
  } else {
    fit = boa::fit(d.index, cfg);
  }

  const auto& schema = d.index.schema();
  json doc = boa::pattern_set_to_json(fit.search.best, schema);
  json rules = json::array();
  for (const auto& p : fit.search.best.patterns()) rules.push_back(p.render(schema));
  doc["rules"] = rules;
  doc["rendered"] = fit.search.best.render(schema);
  doc["score"] = score_json(fit.search.score);
  doc["params"] = params_json(fit.params);
  doc["bounds"] = boa::to_json(fit.bounds);
  doc["support_threshold"] = fit.support_threshold;
  doc["mined_pool_size"] = fit.mined_size;
  doc["searched_pool_size"] = fit.pool.size();
  doc["chain_energies"] = fit.search.chain_energies;
  doc["chain_steps"] = fit.search.chain_steps;
  doc["manifest"] = manifest_of(inv, clock.seconds());
  doc["manifest"]["bounds"] = doc["bounds"];
  write_json(inv.outputs.at("model"), doc);

  if (inv.outputs.contains("trace")) {
    std::string csv = csv_header(doc["manifest"]) + "chain,step,current,best,accepted\n";
    for (const auto& r : fit.search.trace) {
      csv += std::to_string(r.chain) + "," + std::to_string(r.step) + "," + num(r.current) + "," + num(r.best) + "," +
             (r.accepted ? "1" : "0") + "\n";
    }
    write_text(inv.outputs.at("trace"), csv);
  }
  std::cerr << "boa: " << fit.search.best.render(schema) << "\n";
  return 0;
}

int run_predict(const Invocation& inv) {
  const Clock clock;
  const auto d = load_dataset(inv);
  const boa::PatternSet model = boa::pattern_set_from_json(read_json(inv.inputs.at("model")), d.index);
  const json manifest = manifest_of(inv, clock.seconds());
  std::string csv = csv_header(manifest) + "record,prediction,fired,label\n";
  for (std::size_t r = 0; r < d.index.num_records(); ++r) {
    std::size_t fired = 0;
    for (std::size_t k = 0; k < model.size() && fired == 0; ++k) {
      if (model[k].coverage().test(r)) fired = k + 1;
    }
    csv += std::to_string(r) + "," + (fired ? "1" : "0") + "," + std::to_string(fired) + "," +
           (d.index.labels().test(r) ? "1" : "0") + "\n";
  }
  write_text(inv.outputs.at("predictions"), csv);
  return 0;
}

int run_evaluate(const Invocation& inv) {
  const Clock clock;
  const auto d = load_dataset(inv);
  if (inv.inputs.contains("model")) {
    const boa::PatternSet model = boa::pattern_set_from_json(read_json(inv.inputs.at("model")), d.index);
    const boa::Metrics m = boa::evaluate_fixed(model, d.index);
    const json manifest = manifest_of(inv, clock.seconds());
    const auto& c = m.confusion;
    write_text(inv.outputs.at("metrics"),
               csv_header(manifest) + "accuracy,tpr,fpr,tp,fp,tn,fn,records\n" + num(m.accuracy) + "," + num(m.tpr) +
                   "," + num(m.fpr) + "," + std::to_string(c.tp) + "," + std::to_string(c.fp) + "," +
                   std::to_string(c.tn) + "," + std::to_string(c.fn) + "," + std::to_string(c.total()) + "\n");
    std::cerr << "boa: accuracy " << num(m.accuracy) << ", tpr " << num(m.tpr) << ", fpr " << num(m.fpr) << "\n";
    return 0;
  }

  boa::KFoldConfig kf;
  kf.k = inv.args.at("kfold").get<std::size_t>();
  kf.label_noise = inv.args.value("noise", 0.0);
  kf.seed = inv.config->search.seed;
  kf.threads = inv.threads;
  const boa::KFoldResult res = boa::kfold_auc(d.table, *inv.config, kf);
  for (const auto& f : res.folds) {
    if (f.skipped) warn("fold " + std::to_string(f.fold) + " skipped: " + f.note);
  }
  const json manifest = manifest_of(inv, clock.seconds());
  std::string csv = csv_header(manifest) + "fold,train_size,test_size,auc,note\n";
  for (const auto& f : res.folds) {
    csv += std::to_string(f.fold) + "," + std::to_string(f.train_size) + "," + std::to_string(f.test_size) + "," +
           (f.skipped ? std::string() : num(f.auc)) + "," + f.note + "\n";
  }
  csv += "mean,,," + num(res.mean_auc) + ",folds used: " + std::to_string(res.used_folds) + "\n";
  csv += "std,,," + num(res.std_auc) + ",\n";
  write_text(inv.outputs.at("metrics"), csv);
  if (inv.outputs.contains("roc")) {
    std::string roc = csv_header(manifest) + "fold,alpha_pos,beta_pos,alpha_neg,beta_neg,fpr,tpr,model_size\n";
    for (const auto& f : res.folds) {
      if (f.skipped) continue;
      for (std::size_t g = 0; g < f.points.size(); ++g) {
        const auto& p = f.points[g];
        roc += std::to_string(f.fold) + "," + num(p.hyper.alpha_pos) + "," + num(p.hyper.beta_pos) + "," +
               num(p.hyper.alpha_neg) + "," + num(p.hyper.beta_neg) + "," + num(p.fpr) + "," + num(p.tpr) + "," +
               std::to_string(f.model_sizes[g]) + "\n";
      }
    }
    write_text(inv.outputs.at("roc"), roc);
  }
  std::cerr << "boa: AUC " << num(res.mean_auc) << " (" << num(res.std_auc) << ") over " << res.used_folds
            << " folds\n";
  return 0;
}

boa::SimSpec sim_spec_of(const json& args) {
  boa::SimSpec s;
  s.records = args.at("N").get<std::size_t>();
  s.candidates = args.at("M").get<std::size_t>();
  s.planted = args.at("m").get<std::size_t>();
  s.density = args.at("density").get<double>();
  s.checkpoints = args.at("checkpoints").get<std::vector<std::size_t>>();
  s.replicates = args.at("replicates").get<std::size_t>();
  s.seed = args.at("seed").get<std::uint64_t>();
  return s;
}

int run_simulate(const Invocation& inv) {
  const Clock clock;
  const boa::SimSpec spec = sim_spec_of(inv.args);
  const boa::SimulationResult res =
      boa::simulation_study(spec, inv.config->search, inv.config->likelihood, inv.threads);
  const json manifest = manifest_of(inv, clock.seconds());
  std::string rows = csv_header(manifest) + "replicate,checkpoint,edit_distance,energy\n";
  for (const auto& r : res.rows) {
    rows += std::to_string(r.replicate) + "," + std::to_string(r.checkpoint) + "," + std::to_string(r.edit_distance) +
            "," + num(r.energy) + "\n";
  }
  write_text(inv.outputs.at("rows"), rows);
  if (inv.outputs.contains("summary")) {
    std::string sum = csv_header(manifest) + "N,M,m,checkpoint,replicates,mean_edit_distance,std_edit_distance\n";
    for (const auto& s : res.summary) {
      sum += std::to_string(spec.records) + "," + std::to_string(spec.candidates) + "," + std::to_string(spec.planted) +
             "," + std::to_string(s.checkpoint) + "," + std::to_string(spec.replicates) + "," +
             num(s.mean_edit_distance) + "," + num(s.std_edit_distance) + "\n";
    }
    write_text(inv.outputs.at("summary"), sum);
  }
  if (inv.outputs.contains("runtime")) {
    std::string rt = csv_header(manifest) + "iterations,seconds,mean_edit_distance\n";
    for (const auto& r : boa::runtime_report(res)) {
      rt += std::to_string(r.iterations) + "," + num(r.seconds) + "," + num(r.mean_edit_distance) + "\n";
    }
    write_text(inv.outputs.at("runtime"), rt);
  }
  for (const auto& s : res.summary) {
    std::cerr << "boa: checkpoint " << s.checkpoint << ": mean edit distance " << num(s.mean_edit_distance) << "\n";
  }
  return 0;
}

int run_bounds(const Invocation& inv) {
  const Clock clock;
  const auto d = load_dataset(inv);
  const boa::ModelConfig& cfg = *inv.config;
  std::optional<boa::MinedPool> pool;
  if (cfg.search.level == boa::SearchLevel::kPattern) {
    pool = inv.inputs.contains("pool") ? boa::pool_from_json(read_json(inv.inputs.at("pool")), d.index)
                                       : boa::mine_pool(d.index, cfg.mining);
  }
  const boa::ModelParams params = boa::resolve_params(cfg, d.index, pool ? &*pool : nullptr);
  const boa::BoundReport report = boa::bound_report(params, d.index.num_positive(), d.index.num_negative(),
                                                    inv.args.value("delta", 0.05));
  json doc = boa::to_json(report);
  doc["params"] = params_json(params);
  doc["records"] = {{"positive", d.index.num_positive()}, {"negative", d.index.num_negative()}};
  doc["manifest"] = manifest_of(inv, clock.seconds());
  if (inv.outputs.contains("report")) {
    write_json(inv.outputs.at("report"), doc);
  } else {
    std::cout << doc.dump(2) << "\n";
  }
  return 0;
}

int dispatch(const Invocation& inv) {
  if (inv.command == "mine") return run_mine(inv);
  if (inv.command == "train") return run_train(inv);
  if (inv.command == "predict") return run_predict(inv);
  if (inv.command == "evaluate") return run_evaluate(inv);
  if (inv.command == "simulate") return run_simulate(inv);
  if (inv.command == "bounds") return run_bounds(inv);
  throw boa::ConfigError("unknown command '" + inv.command + "'");
}

// ---------------------------------------------------------------------------

json read_manifest(const fs::path& artifact) {
  std::ifstream in(artifact, std::ios::binary);
  if (!in) throw boa::DataError("cannot open " + artifact.string());
  std::string first;
  std::getline(in, first);
  constexpr std::string_view kPrefix = "# manifest: ";
  try {
    if (first.starts_with(kPrefix)) return json::parse(first.substr(kPrefix.size()));
    const json doc = read_json(artifact);
    if (!doc.contains("manifest")) throw boa::DataError(artifact.string() + " carries no manifest");
    return doc.at("manifest");
  } catch (const json::exception& e) {
    throw boa::DataError("bad manifest in " + artifact.string() + ": " + e.what());
  }
}

Invocation invocation_from_manifest(const json& m, const fs::path& output_dir, std::size_t threads) {
  Invocation inv;
  try {
    if (m.at("tool") != "boa") throw boa::DataError("manifest was not written by boa");
    if (m.at("version") != kToolVersion) {
      warn("manifest written by boa " + m.at("version").get<std::string>() + ", replaying with " + kToolVersion);
    }
    inv.command = m.at("command").get<std::string>();
    inv.args = m.at("args");
    if (!m.at("config").is_null()) inv.config = boa::model_config_from_json(m.at("config"));
    for (const auto& [role, entry] : m.at("inputs").items()) {
      const fs::path path = entry.at("path").get<std::string>();
      if (!fs::exists(path)) throw boa::DataError("input '" + role + "' not found: " + path.string());
      if (boa::fingerprint_file(path) != entry.at("fingerprint").get<std::string>()) {
        throw boa::DataError("input '" + role + "' changed since the run: " + path.string());
      }
      inv.inputs[role] = path;
    }
    for (const auto& [role, name] : m.at("outputs").items()) inv.outputs[role] = output_dir / name.get<std::string>();
    inv.record_time = m.contains("wall_clock_seconds");
  } catch (const json::exception& e) {
    throw boa::DataError(std::string("malformed manifest: ") + e.what());
  }
  inv.threads = threads;
  return inv;
}

// Flags that override the config file. Only flags given on the command line
// are applied.
struct ConfigFlags {
  std::string config_path;
  std::string prior, level;
  double alpha_pos = 0, beta_pos = 0, alpha_neg = 0, beta_neg = 0;
  std::vector<double> bb_alpha, bb_beta;
  double lambda_m = 0, lambda_l = 0;
  double min_support = 0;
  std::size_t min_support_count = 0, max_length = 0, top_k = 0;
  bool no_negative = false;
  std::size_t max_steps = 0, restarts = 0;
  double explore_p = 0, t0 = 0;
  std::uint64_t seed = 0;
  bool no_support_bound = false;
  std::map<std::string, CLI::Option*> opts;

  void add(CLI::App* app, bool model_flags) {
    app->add_option("--config", config_path, "Model config JSON")->check(CLI::ExistingFile);
    opts["seed"] = app->add_option("--seed", seed, "Master random seed");
    opts["max_steps"] = app->add_option("--max-steps", max_steps, "Annealing steps per chain");
    opts["restarts"] = app->add_option("--restarts", restarts, "Independent chains");
    opts["explore_p"] = app->add_option("--explore-p", explore_p, "Probability of a random move");
    opts["t0"] = app->add_option("--t0", t0, "Initial temperature");
    opts["alpha_pos"] = app->add_option("--alpha-pos", alpha_pos, "Likelihood alpha+");
    opts["beta_pos"] = app->add_option("--beta-pos", beta_pos, "Likelihood beta+");
    opts["alpha_neg"] = app->add_option("--alpha-neg", alpha_neg, "Likelihood alpha-");
    opts["beta_neg"] = app->add_option("--beta-neg", beta_neg, "Likelihood beta-");
    if (!model_flags) return;
    opts["prior"] = app->add_option("--prior", prior, "betabinomial | poisson | flat");
    opts["level"] = app->add_option("--level", level, "pattern | literal");
    opts["bb_alpha"] = app->add_option("--bb-alpha", bb_alpha, "Beta-Binomial alpha per length (one value broadcasts)");
    opts["bb_beta"] = app->add_option("--bb-beta", bb_beta, "Beta-Binomial beta per length (one value broadcasts)");
    opts["lambda_m"] = app->add_option("--lambda-m", lambda_m, "Poisson prior mean pattern count");
    opts["lambda_l"] = app->add_option("--lambda-l", lambda_l, "Poisson prior mean pattern length");
    opts["min_support"] = app->add_option("--min-support", min_support, "Minimum support as a fraction of S+");
    opts["min_support_count"] = app->add_option("--min-support-count", min_support_count, "Minimum support count on S+");
    opts["max_length"] = app->add_option("--max-length", max_length, "Longest pattern");
    opts["top_k"] = app->add_option("--top-k", top_k, "Keep the top-k patterns by information gain");
    opts["no_negative"] = app->add_flag("--no-negative-literals", no_negative, "Only = and >= / <= literals");
    opts["no_support_bound"] = app->add_flag("--no-support-bound", no_support_bound, "Skip the support-bound filter");
  }

  bool given(const char* key) const {
    const auto it = opts.find(key);
    return it != opts.end() && it->second->count() > 0;
  }

  boa::ModelConfig resolve() const {
    boa::ModelConfig c = config_path.empty() ? boa::ModelConfig{} : boa::load_model_config(config_path);
    if (given("prior")) c.prior = boa::parse_prior_kind(prior);
    if (given("level")) c.search.level = boa::parse_search_level(level);
    if (given("alpha_pos")) c.likelihood.alpha_pos = alpha_pos;
    if (given("beta_pos")) c.likelihood.beta_pos = beta_pos;
    if (given("alpha_neg")) c.likelihood.alpha_neg = alpha_neg;
    if (given("beta_neg")) c.likelihood.beta_neg = beta_neg;
    if (given("bb_alpha")) c.bb_alpha = bb_alpha;
    if (given("bb_beta")) c.bb_beta = bb_beta;
    if (given("lambda_m")) c.lambda_m = lambda_m;
    if (given("lambda_l")) c.lambda_l = lambda_l;
    if (given("min_support")) c.mining.min_support_fraction = min_support;
    if (given("min_support_count")) c.mining.min_support_count = min_support_count;
    if (given("max_length")) c.mining.max_length = max_length;
    if (given("top_k")) c.mining.top_k = top_k;
    if (given("no_negative")) c.mining.include_negative_literals = false;
    if (given("max_steps")) c.search.max_steps = max_steps;
    if (given("restarts")) c.search.restarts = restarts;
    if (given("explore_p")) c.search.explore_p = explore_p;
    if (given("t0")) c.search.t0 = t0;
    if (given("seed")) c.search.seed = seed;
    if (given("no_support_bound")) c.apply_support_bound = false;
    c.validate();
    return c;
  }
};

struct Paths {
  std::string schema, data, pool, model;
  std::string out, trace, roc, summary, runtime;
};

void add_dataset(CLI::App* app, Paths& p) {
  app->add_option("--schema", p.schema, "Schema JSON")->required()->check(CLI::ExistingFile);
  app->add_option("--data", p.data, "Data CSV")->required();
}

void put(std::map<std::string, fs::path>& m, const char* role, const std::string& path) {
  if (!path.empty()) m[role] = path;
}

int run(int argc, char** argv) {
  CLI::App app{"Bayesian or's of and's: rule mining, MAP search and bounds"};
  app.require_subcommand(1);
  bool record_time = false;
  std::size_t threads = 0;
  app.add_flag("--record-time", record_time, "Store wall-clock seconds in manifests (breaks byte-identical reruns)");
  app.add_option("--threads", threads, "Worker threads (default: BOA_THREADS, else all cores)");

  Paths paths;
  ConfigFlags mine_flags, train_flags, eval_flags, sim_flags, bounds_flags;

  auto* mine = app.add_subcommand("mine", "Mine the candidate pool");
  add_dataset(mine, paths);
  mine_flags.add(mine, true);
  mine->add_option("--out", paths.out, "Pool JSON")->required();
  mine->add_option("--roc-csv", paths.roc, "(fpr, tpr, selected) per frequent pattern");

  auto* train = app.add_subcommand("train", "Fit a MAP model");
  add_dataset(train, paths);
  train_flags.add(train, true);
  train->add_option("--pool", paths.pool, "Pool JSON from `mine` (pattern level)");
  train->add_option("--out", paths.out, "Model JSON")->required();
  train->add_option("--trace", paths.trace, "Per-step trace CSV");

  auto* predict = app.add_subcommand("predict", "Classify records with a model");
  add_dataset(predict, paths);
  predict->add_option("--model", paths.model, "Model JSON")->required();
  predict->add_option("--out", paths.out, "Predictions CSV")->required();

  std::size_t kfold = 0;
  double noise = 0.0;
  auto* evaluate = app.add_subcommand("evaluate", "Score a fixed model, or run k-fold AUC");
  add_dataset(evaluate, paths);
  eval_flags.add(evaluate, true);
  auto* model_opt = evaluate->add_option("--model", paths.model, "Model JSON to score");
  auto* kfold_opt = evaluate->add_option("--kfold", kfold, "Folds for cross-validated AUC")->check(CLI::Range(2, 1000));
  model_opt->excludes(kfold_opt);
  evaluate->add_option("--noise", noise, "Fraction of training labels flipped")->check(CLI::Range(0.0, 0.999));
  evaluate->add_option("--out", paths.out, "Metrics CSV")->required();
  evaluate->add_option("--roc-csv", paths.roc, "Per-fold ROC points");

  std::size_t sim_n = 2000, sim_m_cols = 1000, sim_m = 5, sim_reps = 30;
  double sim_density = 0.1;
  std::vector<std::size_t> sim_checkpoints{5000, 10000, 20000};
  auto* simulate = app.add_subcommand("simulate", "Planted-recovery simulation study");
  sim_flags.add(simulate, false);
  simulate->add_option("--records,-N", sim_n, "Records per instance");
  simulate->add_option("--candidates,-M", sim_m_cols, "Candidate patterns per instance");
  simulate->add_option("--planted,-m", sim_m, "Planted patterns");
  simulate->add_option("--density", sim_density, "Probability a cell is 1");
  simulate->add_option("--checkpoints", sim_checkpoints, "Steps at which to record")->delimiter(',');
  simulate->add_option("--replicates", sim_reps, "Instances");
  simulate->add_option("--out", paths.out, "Per-replicate CSV")->required();
  simulate->add_option("--summary", paths.summary, "Mean edit distance per checkpoint");
  simulate->add_option("--runtime", paths.runtime, "Seconds per checkpoint (wall clock, not reproducible)");

  double delta = 0.05;
  auto* bounds = app.add_subcommand("bounds", "Report the size, support and risk bounds");
  add_dataset(bounds, paths);
  bounds_flags.add(bounds, true);
  bounds->add_option("--pool", paths.pool, "Pool JSON (pattern level; mined when absent)");
  bounds->add_option("--delta", delta, "Confidence parameter")->check(CLI::Range(1e-12, 0.999999));
  bounds->add_option("--out", paths.out, "Report JSON (stdout when absent)");

  std::string artifact, output_dir;
  auto* rerun = app.add_subcommand("rerun", "Replay the command recorded in an artifact's manifest");
  rerun->add_option("artifact", artifact, "Artifact carrying a manifest")->required()->check(CLI::ExistingFile);
  rerun->add_option("--output-dir", output_dir, "Where to write the replayed artifacts")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (rerun->parsed()) return dispatch(invocation_from_manifest(read_manifest(artifact), output_dir, threads));

  Invocation inv;
  inv.record_time = record_time;
  inv.threads = threads;
  put(inv.inputs, "schema", paths.schema);
  put(inv.inputs, "data", paths.data);
  if (mine->parsed()) {
    inv.command = "mine";
    inv.config = mine_flags.resolve();
    put(inv.outputs, "pool", paths.out);
    put(inv.outputs, "roc", paths.roc);
  } else if (train->parsed()) {
    inv.command = "train";
    inv.config = train_flags.resolve();
    if (inv.config->search.level == boa::SearchLevel::kPattern && paths.pool.empty()) {
      throw boa::ConfigError("pattern-level training needs --pool (run `boa mine` first)");
    }
    if (inv.config->search.level == boa::SearchLevel::kPattern) put(inv.inputs, "pool", paths.pool);
    put(inv.outputs, "model", paths.out);
    put(inv.outputs, "trace", paths.trace);
  } else if (predict->parsed()) {
    inv.command = "predict";
    put(inv.inputs, "model", paths.model);
    put(inv.outputs, "predictions", paths.out);
  } else if (evaluate->parsed()) {
    inv.command = "evaluate";
    if (paths.model.empty() && kfold == 0) throw boa::ConfigError("evaluate needs --model or --kfold");
    if (!paths.model.empty()) {
      put(inv.inputs, "model", paths.model);
    } else {
      inv.config = eval_flags.resolve();
      inv.args = {{"kfold", kfold}, {"noise", noise}};
      put(inv.outputs, "roc", paths.roc);
    }
    put(inv.outputs, "metrics", paths.out);
  } else if (simulate->parsed()) {
    inv.command = "simulate";
    inv.inputs.clear();
    inv.config = sim_flags.resolve();
    inv.config->prior = boa::PriorKind::kFlat;
    inv.args = {{"N", sim_n},           {"M", sim_m_cols},         {"m", sim_m},
                {"density", sim_density}, {"checkpoints", sim_checkpoints}, {"replicates", sim_reps},
                {"seed", inv.config->search.seed}};
    boa::SimSpec spec = sim_spec_of(inv.args);
    spec.validate();
    put(inv.outputs, "rows", paths.out);
    put(inv.outputs, "summary", paths.summary);
    put(inv.outputs, "runtime", paths.runtime);
  } else if (bounds->parsed()) {
    inv.command = "bounds";
    inv.config = bounds_flags.resolve();
    inv.args = {{"delta", delta}};
    if (!paths.pool.empty()) put(inv.inputs, "pool", paths.pool);
    put(inv.outputs, "report", paths.out);
  }
  return dispatch(inv);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const boa::ConfigError& e) {
    std::cerr << "boa: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const boa::DataError& e) {
    std::cerr << "boa: data error: " << e.what() << "\n";
    return kExitData;
  } catch (const boa::ModelError& e) {
    std::cerr << "boa: model error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "boa: error: " << e.what() << "\n";
    return 1;
  }
}
