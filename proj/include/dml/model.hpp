#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dml/matrix.hpp"

namespace dml {

// Pre-normalization norms below this are treated as degenerate: the row maps
// to the canonical basis vector e1 instead of dividing by ~0.
inline constexpr double kNormGuard = 1e-12;

// MLP embedding head: affine layers with ReLU on the hidden ones, then a
// row-wise L2 normalization so every embedding lands on the unit hypersphere.
struct EmbeddingModel {
  std::vector<std::size_t> layer_dims;     // input dim first, embedding dim last
  std::vector<Matrix> weights;             // weights[i]: layer_dims[i+1] x layer_dims[i]
  std::vector<std::vector<double>> biases; // biases[i]: layer_dims[i+1]

  std::size_t input_dim() const { return layer_dims.front(); }
  std::size_t embedding_dim() const { return layer_dims.back(); }
  std::size_t layer_count() const { return weights.size(); }
};

// Parameter-shaped gradient container.
struct Gradients {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;

  void add(const Gradients& other);
  void scale(double factor);
  bool all_finite() const;
};

// Everything forward() computes, kept for the backward pass.
struct ForwardTrace {
  std::vector<Matrix> activations;  // activations[0] = input, activations[L] = pre-norm output
  Matrix embeddings;                // row-normalized activations[L]
  std::vector<double> prenorm_norms;
  bool degenerate = false;          // any row hit the zero-norm guard
};

Gradients zero_gradients(const EmbeddingModel& model);

// He-style init: weights ~ N(0, 2/fan_in), biases zero. Deterministic per seed.
EmbeddingModel init_model(const std::vector<std::size_t>& layer_dims, std::uint64_t seed);

ForwardTrace forward_trace(const EmbeddingModel& model, const Matrix& batch);

// Convenience wrapper for callers that only need the embeddings.
Matrix forward(const EmbeddingModel& model, const Matrix& batch);

// Gradient of sum(upstream ⊙ embeddings) with respect to every parameter.
// The normalization Jacobian (I − yyᵀ)/‖z‖ is applied per row; degenerate
// rows contribute nothing.
Gradients backward(const EmbeddingModel& model, const ForwardTrace& trace,
                   const Matrix& upstream);
Gradients backward(const EmbeddingModel& model, const Matrix& batch,
                   const Matrix& upstream);

// Text persistence: `dims: d0,d1,...,dk` header, then per layer the weight
// rows followed by the bias row, 17-significant-digit decimals. Round-trips
// bit-exactly.
void save_model(const EmbeddingModel& model, const std::string& path);
void write_model(const EmbeddingModel& model, std::ostream& out);
EmbeddingModel load_model(const std::string& path);
EmbeddingModel read_model(std::istream& in);

}  // namespace dml
