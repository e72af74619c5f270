#include "dml/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include <json.hpp>

namespace dml {

namespace {

using json = nlohmann::ordered_json;

json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("config " + path + ": " + e.what());
  }
}

json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("config " + origin + ": " + e.what());
  }
}

void reject_unknown_keys(const json& obj, const std::string& scope,
                         const std::set<std::string>& allowed) {
  for (const auto& [key, _] : obj.items())
    if (!allowed.contains(key))
      throw ConfigError("config: unknown key '" +
                        (scope.empty() ? key : scope + "." + key) + "'");
}

// json silently wraps negative integers into unsigned types; reject them.
void require_non_negative(const json& value, const std::string& scope,
                          const std::string& key) {
  auto bad = [&](const json& v) {
    return v.is_number_integer() && !v.is_number_unsigned();
  };
  if (bad(value) || (value.is_array() &&
                     std::any_of(value.begin(), value.end(), bad)))
    throw ConfigError("config: '" + scope + "." + key + "' must be non-negative");
}

template <typename T>
T get_or(const json& obj, const std::string& scope, const std::string& key,
         const T& fallback) {
  if (!obj.contains(key)) return fallback;
  if constexpr (std::is_unsigned_v<T>) require_non_negative(obj.at(key), scope, key);
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: bad value for '" + scope + "." + key + "'");
  }
}

template <typename T>
T get_required(const json& obj, const std::string& scope, const std::string& key) {
  if (!obj.contains(key))
    throw ConfigError("config: missing required key '" + scope + "." + key + "'");
  if constexpr (std::is_unsigned_v<T> ||
                std::is_same_v<T, std::vector<std::size_t>>)
    require_non_negative(obj.at(key), scope, key);
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: bad value for '" + scope + "." + key + "'");
  }
}

SchedulerConfig parse_scheduler(const json& obj) {
  reject_unknown_keys(obj, "scheduler",
                      {"kind", "mu0", "linear_step", "dams_step", "threshold",
                       "margin_cap"});
  SchedulerConfig sc;
  sc.kind = scheduler_kind_from_string(
      get_required<std::string>(obj, "scheduler", "kind"));
  // The experimental defaults: constant runs at 0.3, the schedulers start at 0.
  const double default_mu0 = sc.kind == SchedulerKind::Constant ? 0.3 : 0.0;
  sc.mu0 = get_or<double>(obj, "scheduler", "mu0", default_mu0);
  sc.linear_step = get_or<double>(obj, "scheduler", "linear_step", 0.01);
  sc.dams_step = get_or<double>(obj, "scheduler", "dams_step", 0.01);
  sc.threshold = get_or<double>(obj, "scheduler", "threshold", 0.95);
  sc.margin_cap = get_or<double>(obj, "scheduler", "margin_cap", 2.0);
  return sc;
}

TrainConfig parse_train(const json& obj) {
  reject_unknown_keys(obj, "train",
                      {"epochs", "batch_triplets", "learning_rate", "mining", "seed",
                       "model_dims", "eval_every"});
  TrainConfig tc;
  tc.epochs = get_or<std::size_t>(obj, "train", "epochs", 100);
  tc.batch_triplets = get_or<std::size_t>(obj, "train", "batch_triplets", 64);
  tc.learning_rate = get_or<double>(obj, "train", "learning_rate", 0.001);
  tc.mining = get_or<bool>(obj, "train", "mining", true);
  tc.seed = get_or<std::uint64_t>(obj, "train", "seed", 0);
  tc.model_dims = get_required<std::vector<std::size_t>>(obj, "train", "model_dims");
  tc.eval_every = get_or<std::size_t>(obj, "train", "eval_every", 0);
  return tc;
}

DataConfig parse_data(const json& obj) {
  reject_unknown_keys(obj, "data",
                      {"dataset", "train_dataset", "test_dataset", "train_fraction",
                       "split_seed"});
  DataConfig dc;
  dc.dataset = get_or<std::string>(obj, "data", "dataset", "");
  dc.train_dataset = get_or<std::string>(obj, "data", "train_dataset", "");
  dc.test_dataset = get_or<std::string>(obj, "data", "test_dataset", "");
  dc.train_fraction = get_or<double>(obj, "data", "train_fraction", 0.5);
  dc.split_seed = get_or<std::uint64_t>(obj, "data", "split_seed", 0);

  const bool split_mode = !dc.dataset.empty();
  const bool explicit_mode = !dc.train_dataset.empty();
  if (split_mode == explicit_mode)
    throw ConfigError(
        "config: data must set exactly one of 'dataset' or 'train_dataset'");
  if (!explicit_mode && !dc.test_dataset.empty())
    throw ConfigError("config: 'data.test_dataset' requires 'data.train_dataset'");
  return dc;
}

EvalConfig parse_eval(const json& obj) {
  reject_unknown_keys(obj, "eval", {"pair_seed", "recall_ks"});
  EvalConfig ec;
  ec.pair_seed = get_or<std::uint64_t>(obj, "eval", "pair_seed", 0);
  if (obj.contains("recall_ks")) {
    ec.recall_ks = get_required<std::vector<std::size_t>>(obj, "eval", "recall_ks");
    ec.ks_explicit = true;
    if (ec.recall_ks.empty())
      throw ConfigError("config: 'eval.recall_ks' must not be empty");
  }
  return ec;
}

RunConfig parse_run_json(const json& root) {
  if (!root.is_object()) throw ConfigError("config: top level must be an object");
  reject_unknown_keys(root, "", {"train", "scheduler", "data", "eval", "output_dir"});

  RunConfig rc;
  if (!root.contains("train"))
    throw ConfigError("config: missing required key 'train'");
  rc.train = parse_train(root.at("train"));
  if (!root.contains("scheduler"))
    throw ConfigError("config: missing required key 'scheduler'");
  rc.train.scheduler = parse_scheduler(root.at("scheduler"));
  if (!root.contains("data"))
    throw ConfigError("config: missing required key 'data'");
  rc.data = parse_data(root.at("data"));
  if (root.contains("eval")) rc.eval = parse_eval(root.at("eval"));
  rc.output_dir = get_required<std::string>(root, "", "output_dir");
  if (rc.output_dir.empty()) throw ConfigError("config: 'output_dir' must not be empty");
  return rc;
}

std::vector<double> grid_values(const json& obj, const std::string& key) {
  auto values = get_required<std::vector<double>>(obj, "sweep", key);
  if (values.empty())
    throw ConfigError("config: 'sweep." + key + "' must list at least one value");
  return values;
}

}  // namespace

RunConfig parse_run_config(const std::string& path) {
  return parse_run_json(parse_json_file(path));
}

RunConfig parse_run_config_text(const std::string& text, const std::string& origin) {
  return parse_run_json(parse_json_text(text, origin));
}

SweepConfig parse_sweep_config(const std::string& path) {
  const json root = parse_json_file(path);
  if (!root.is_object()) throw ConfigError("config: top level must be an object");
  reject_unknown_keys(root, "", {"train", "data", "eval", "sweep", "output_dir"});

  SweepConfig sc;
  if (!root.contains("train"))
    throw ConfigError("config: missing required key 'train'");
  sc.base.train = parse_train(root.at("train"));
  sc.base.train.scheduler.kind = SchedulerKind::Dams;
  if (!root.contains("data"))
    throw ConfigError("config: missing required key 'data'");
  sc.base.data = parse_data(root.at("data"));
  if (root.contains("eval")) sc.base.eval = parse_eval(root.at("eval"));
  sc.base.output_dir = get_required<std::string>(root, "", "output_dir");

  if (!root.contains("sweep"))
    throw ConfigError("config: missing required key 'sweep'");
  const json& sweep = root.at("sweep");
  reject_unknown_keys(sweep, "sweep",
                      {"mu0", "threshold", "dams_step", "repetitions"});
  sc.mu0_values = grid_values(sweep, "mu0");
  sc.threshold_values = grid_values(sweep, "threshold");
  sc.step_values = grid_values(sweep, "dams_step");
  sc.repetitions = get_or<std::size_t>(sweep, "sweep", "repetitions", 1);
  if (sc.repetitions < 1)
    throw ConfigError("config: 'sweep.repetitions' must be >= 1");
  return sc;
}

std::string resolved_run_config_json(const RunConfig& config) {
  json root;
  root["train"] = {{"epochs", config.train.epochs},
                   {"batch_triplets", config.train.batch_triplets},
                   {"learning_rate", config.train.learning_rate},
                   {"mining", config.train.mining},
                   {"seed", config.train.seed},
                   {"model_dims", config.train.model_dims},
                   {"eval_every", config.train.eval_every}};
  const SchedulerConfig& sc = config.train.scheduler;
  root["scheduler"] = {{"kind", to_string(sc.kind)},
                       {"mu0", sc.mu0},
                       {"linear_step", sc.linear_step},
                       {"dams_step", sc.dams_step},
                       {"threshold", sc.threshold},
                       {"margin_cap", sc.margin_cap}};
  json data;
  if (config.data.uses_split()) {
    data["dataset"] = config.data.dataset;
    data["train_fraction"] = config.data.train_fraction;
    data["split_seed"] = config.data.split_seed;
  } else {
    data["train_dataset"] = config.data.train_dataset;
    if (!config.data.test_dataset.empty())
      data["test_dataset"] = config.data.test_dataset;
  }
  root["data"] = data;
  root["eval"] = {{"pair_seed", config.eval.pair_seed},
                  {"recall_ks", config.eval.recall_ks}};
  root["output_dir"] = config.output_dir;
  return root.dump(2) + "\n";
}

}  // namespace dml
