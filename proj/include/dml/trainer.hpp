#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "dml/adam.hpp"
#include "dml/dataset.hpp"
#include "dml/eval.hpp"
#include "dml/model.hpp"
#include "dml/scheduler.hpp"

namespace dml {

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_triplets = 64;  // triplets per optimizer step
  double learning_rate = 0.001;
  bool mining = true;  // in-triplet hard negative mining
  std::uint64_t seed = 0;
  SchedulerConfig scheduler;
  std::vector<std::size_t> model_dims;
  std::size_t eval_every = 0;  // 0 = evaluate only after the final epoch
};

// Effective-margin histogram: 40 width-0.1 bins over [-2,2) plus an overflow
// bin for values at (or numerically past) the hypersphere diameter.
inline constexpr std::size_t kHistogramBins = 41;

std::size_t histogram_bin(double effective_margin);
std::pair<double, double> histogram_bin_edges(std::size_t bin);

struct EpochStats {
  std::size_t epoch = 0;      // 1-based
  double margin_used = 0.0;   // margin active during the epoch
  double mean_loss = 0.0;
  double easy_proportion = 0.0;
  double median_effective_margin = 0.0;
  std::array<std::uint64_t, kHistogramBins> histogram{};
  std::size_t triplet_count = 0;
};

// One (effective margin, loss) record per triplet, in processing order.
using Observation = std::pair<double, double>;

// Aggregates the statistics the schedulers and figures consume. epoch and
// margin_used are taken as given; everything else is derived from the
// observations.
EpochStats epoch_stats_from_observations(double margin_used,
                                         const std::vector<Observation>& observations);

// Periodic evaluation target. Pair generation is seeded independently of the
// training seed so the pair set is fixed once per run.
struct EvalHook {
  const LabeledDataset* dataset = nullptr;
  std::uint64_t pair_seed = 0;
  std::vector<std::size_t> recall_ks = {1, 2, 4, 8};
};

struct TrainResult {
  EmbeddingModel model;
  std::vector<EpochStats> history;
  std::vector<std::pair<std::size_t, MetricReport>> metric_trace;  // (epoch, report)
  double final_margin = 0.0;  // scheduler margin after the last epoch end
};

// Per epoch: sample triplets, process them in batches (one Adam step per
// batch, gradients averaged over the batch), record every triplet's
// effective margin and loss as processed, then advance the scheduler with
// the epoch's easy proportion. Fully deterministic per config.seed.
TrainResult train(const TrainConfig& config, const LabeledDataset& train_ds,
                  const EvalHook* eval_hook = nullptr);

}  // namespace dml
