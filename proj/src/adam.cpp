#include "dml/adam.hpp"

#include <cmath>

namespace dml {

namespace {

void require_matching_shapes(const EmbeddingModel& model, const Gradients& grads) {
  if (grads.weights.size() != model.layer_count() ||
      grads.biases.size() != model.layer_count())
    throw ShapeError("adam_step: gradient layer count mismatch");
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    if (grads.weights[l].rows() != model.weights[l].rows() ||
        grads.weights[l].cols() != model.weights[l].cols() ||
        grads.biases[l].size() != model.biases[l].size())
      throw ShapeError("adam_step: gradient shape mismatch at layer " +
                       std::to_string(l));
  }
}

}  // namespace

AdamState adam_init(const EmbeddingModel& model, double learning_rate, double beta1,
                    double beta2, double epsilon) {
  if (learning_rate <= 0.0) throw ConfigError("adam: learning rate must be positive");
  if (beta1 <= 0.0 || beta1 >= 1.0 || beta2 <= 0.0 || beta2 >= 1.0)
    throw ConfigError("adam: betas must lie in (0,1)");
  if (epsilon <= 0.0) throw ConfigError("adam: epsilon must be positive");
  AdamState state;
  state.learning_rate = learning_rate;
  state.beta1 = beta1;
  state.beta2 = beta2;
  state.epsilon = epsilon;
  state.first_moment = zero_gradients(model);
  state.second_moment = zero_gradients(model);
  return state;
}

void adam_step(EmbeddingModel& model, AdamState& state, const Gradients& grads) {
  require_matching_shapes(model, grads);
  if (!grads.all_finite())
    throw NumericError("adam_step: non-finite gradient, step refused");

  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double corr1 = 1.0 - std::pow(state.beta1, t);
  const double corr2 = 1.0 - std::pow(state.beta2, t);

  auto update = [&](double& param, double& m, double& v, double g) {
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g * g;
    const double m_hat = m / corr1;
    const double v_hat = v / corr2;
    param -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
  };

  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    Matrix& w = model.weights[l];
    Matrix& mw = state.first_moment.weights[l];
    Matrix& vw = state.second_moment.weights[l];
    const Matrix& gw = grads.weights[l];
    for (std::size_t i = 0; i < w.size(); ++i)
      update(w.data()[i], mw.data()[i], vw.data()[i], gw.data()[i]);

    auto& b = model.biases[l];
    auto& mb = state.first_moment.biases[l];
    auto& vb = state.second_moment.biases[l];
    const auto& gb = grads.biases[l];
    for (std::size_t i = 0; i < b.size(); ++i) update(b[i], mb[i], vb[i], gb[i]);
  }

  for (const auto& w : model.weights)
    if (!w.all_finite())
      throw NumericError("adam_step: update produced non-finite parameters");
}

}  // namespace dml
