#include "dml/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "dml/loss.hpp"
#include "dml/rng.hpp"

namespace dml {

std::size_t histogram_bin(double effective_margin) {
  const double shifted = (effective_margin + 2.0) * 10.0;
  if (!(shifted > 0.0)) return 0;
  if (shifted >= 40.0) return 40;
  return static_cast<std::size_t>(shifted);
}

std::pair<double, double> histogram_bin_edges(std::size_t bin) {
  if (bin >= 40) return {2.0, 2.0};
  const double lo = (static_cast<double>(bin) - 20.0) / 10.0;
  const double hi = (static_cast<double>(bin) - 19.0) / 10.0;
  return {lo, hi};
}

EpochStats epoch_stats_from_observations(double margin_used,
                                         const std::vector<Observation>& observations) {
  if (observations.empty())
    throw ValueError("epoch_stats_from_observations: no observations");

  EpochStats stats;
  stats.margin_used = margin_used;
  stats.triplet_count = observations.size();

  double loss_sum = 0.0;
  std::size_t easy = 0;
  std::vector<double> margins;
  margins.reserve(observations.size());
  for (const auto& [mu_hat, loss] : observations) {
    loss_sum += loss;
    if (loss == 0.0) ++easy;
    margins.push_back(mu_hat);
    stats.histogram[histogram_bin(mu_hat)] += 1;
  }
  stats.mean_loss = loss_sum / static_cast<double>(observations.size());
  stats.easy_proportion =
      static_cast<double>(easy) / static_cast<double>(observations.size());

  std::sort(margins.begin(), margins.end());
  const std::size_t n = margins.size();
  stats.median_effective_margin =
      (n % 2 == 1) ? margins[n / 2] : (margins[n / 2 - 1] + margins[n / 2]) / 2.0;
  return stats;
}

namespace {

Matrix gather_rows(const LabeledDataset& ds, const std::vector<Triplet>& triplets,
                   std::size_t begin, std::size_t end, std::size_t Triplet::*role) {
  Matrix out(end - begin, ds.feature_dim());
  for (std::size_t i = begin; i < end; ++i) {
    const auto src = ds.features.row(triplets[i].*role);
    std::copy(src.begin(), src.end(), out.row(i - begin).begin());
  }
  return out;
}

void validate_config(const TrainConfig& config, const LabeledDataset& ds) {
  if (config.epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (config.batch_triplets < 1) throw ConfigError("train: batch_triplets must be >= 1");
  if (!(config.learning_rate > 0.0))
    throw ConfigError("train: learning_rate must be positive");
  if (config.model_dims.empty() || config.model_dims.front() != ds.feature_dim())
    throw ConfigError("train: model input dim " +
                      std::to_string(config.model_dims.empty() ? 0
                                                               : config.model_dims.front()) +
                      " does not match dataset feature dim " +
                      std::to_string(ds.feature_dim()));
}

}  // namespace

TrainResult train(const TrainConfig& config, const LabeledDataset& train_ds,
                  const EvalHook* eval_hook) {
  validate_config(config, train_ds);
  if (has_singleton_class(train_ds))
    throw ValueError("train: training set contains singleton classes");

  TrainResult result;
  result.model = init_model(config.model_dims, mix_seed(config.seed, 1));
  AdamState adam = adam_init(result.model, config.learning_rate);
  SchedulerState sched = scheduler_init(config.scheduler);
  const std::uint64_t sampling_seed = mix_seed(config.seed, 2);

  auto run_eval = [&](std::size_t epoch) {
    if (!eval_hook || !eval_hook->dataset) return;
    const Matrix embeddings = forward(result.model, eval_hook->dataset->features);
    result.metric_trace.emplace_back(
        epoch, evaluate(embeddings, *eval_hook->dataset, eval_hook->pair_seed,
                        eval_hook->recall_ks));
  };

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const double margin_used = margin(sched);
    const auto triplets = sample_triplets(train_ds, sampling_seed, epoch);

    std::vector<Observation> observations;
    observations.reserve(triplets.size());

    for (std::size_t begin = 0; begin < triplets.size();
         begin += config.batch_triplets) {
      const std::size_t end = std::min(begin + config.batch_triplets, triplets.size());
      const std::size_t batch_size = end - begin;
      const std::size_t batch_index = begin / config.batch_triplets + 1;

      try {
        const Matrix anchors =
            gather_rows(train_ds, triplets, begin, end, &Triplet::anchor);
        const Matrix positives =
            gather_rows(train_ds, triplets, begin, end, &Triplet::positive);
        const Matrix negatives =
            gather_rows(train_ds, triplets, begin, end, &Triplet::negative);

        const ForwardTrace trace_a = forward_trace(result.model, anchors);
        const ForwardTrace trace_p = forward_trace(result.model, positives);
        const ForwardTrace trace_n = forward_trace(result.model, negatives);

        // Mean aggregation: scale each triplet's embedding gradients by 1/B
        // so the summed backward pass yields the batch-mean parameter
        // gradient.
        const double inv_batch = 1.0 / static_cast<double>(batch_size);
        Matrix up_a(batch_size, result.model.embedding_dim());
        Matrix up_p(batch_size, result.model.embedding_dim());
        Matrix up_n(batch_size, result.model.embedding_dim());

        for (std::size_t i = 0; i < batch_size; ++i) {
          const auto a = trace_a.embeddings.row(i);
          const auto p = trace_p.embeddings.row(i);
          const auto n = trace_n.embeddings.row(i);
          const TripletDistances td = triplet_distances(a, p, n, config.mining);
          const TripletGrad tg = triplet_loss_grad(a, p, n, margin_used, config.mining);
          if (!std::isfinite(tg.loss)) throw NumericError("non-finite loss");
          observations.emplace_back(td.effective_margin, tg.loss);
          for (std::size_t c = 0; c < up_a.cols(); ++c) {
            up_a(i, c) = tg.d_anchor[c] * inv_batch;
            up_p(i, c) = tg.d_positive[c] * inv_batch;
            up_n(i, c) = tg.d_negative[c] * inv_batch;
          }
        }

        Gradients grads = backward(result.model, trace_a, up_a);
        grads.add(backward(result.model, trace_p, up_p));
        grads.add(backward(result.model, trace_n, up_n));
        adam_step(result.model, adam, grads);
      } catch (const NumericError& e) {
        throw DivergenceError("train: numeric divergence at epoch " +
                              std::to_string(epoch) + ", batch " +
                              std::to_string(batch_index) + " (" + e.what() + ")");
      }
    }

    EpochStats stats = epoch_stats_from_observations(margin_used, observations);
    stats.epoch = epoch;
    result.history.push_back(stats);
    sched = scheduler_epoch_end(sched, stats.easy_proportion);

    const bool periodic = config.eval_every > 0 && epoch % config.eval_every == 0;
    if (periodic || epoch == config.epochs) run_eval(epoch);
  }

  result.final_margin = margin(sched);
  return result;
}

}  // namespace dml
