#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dml/trainer.hpp"

namespace dml {

// Where the samples come from: either one CSV that gets singleton-cleaned
// and split class-disjointly, or explicit train/test files.
struct DataConfig {
  std::string dataset;
  std::string train_dataset;
  std::string test_dataset;
  double train_fraction = 0.5;
  std::uint64_t split_seed = 0;

  bool uses_split() const { return !dataset.empty(); }
};

struct EvalConfig {
  std::uint64_t pair_seed = 0;
  std::vector<std::size_t> recall_ks = {1, 2, 4, 8};
  bool ks_explicit = false;  // explicit lists are enforced, defaults are clamped
};

struct RunConfig {
  TrainConfig train;  // scheduler included
  DataConfig data;
  EvalConfig eval;
  std::string output_dir;
};

// DAMS hyperparameter grid over the run config's training setup. Scheduler
// kind is dams for every cell; per-cell seeds are derived from the base seed.
struct SweepConfig {
  RunConfig base;
  std::vector<double> mu0_values;
  std::vector<double> threshold_values;
  std::vector<double> step_values;
  std::size_t repetitions = 1;
};

// Parsers reject unknown keys by name and apply the documented defaults
// (epochs 100, batch 64, lr 0.001, mining on; mu0 0.3 for constant and 0.0
// otherwise, steps 0.01, threshold 0.95, cap 2.0).
RunConfig parse_run_config(const std::string& path);
RunConfig parse_run_config_text(const std::string& text, const std::string& origin);

SweepConfig parse_sweep_config(const std::string& path);

// Fully resolved echo; feeding it back reproduces the run byte-for-byte.
std::string resolved_run_config_json(const RunConfig& config);

}  // namespace dml
