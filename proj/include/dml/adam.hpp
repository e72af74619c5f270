#pragma once

#include <cstdint>

#include "dml/model.hpp"

namespace dml {

// Bias-corrected Adam with the usual defaults (lr=0.001, beta1=0.9,
// beta2=0.999, eps=1e-8).
struct AdamState {
  std::uint64_t step_count = 0;
  Gradients first_moment;
  Gradients second_moment;
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

AdamState adam_init(const EmbeddingModel& model, double learning_rate = 0.001,
                    double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8);

// One update in place. Refuses (state untouched) if any gradient entry is
// non-finite.
void adam_step(EmbeddingModel& model, AdamState& state, const Gradients& grads);

}  // namespace dml
