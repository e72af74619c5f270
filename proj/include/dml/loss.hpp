#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dml/matrix.hpp"

namespace dml {

// (anchor, positive, negative) sample indices into the owning dataset.
struct Triplet {
  std::size_t anchor = 0;
  std::size_t positive = 0;
  std::size_t negative = 0;
};

// Distances of an embedded triplet. effective_margin is delta_minus -
// delta_plus: the separation the triplet actually achieves.
struct TripletDistances {
  double delta_plus = 0.0;
  double delta_minus = 0.0;
  double effective_margin = 0.0;
  bool swapped = false;  // in-triplet mining swapped anchor and positive
};

enum class Difficulty { Easy, Hard };

// Euclidean (non-squared) distance.
double distance(std::span<const double> u, std::span<const double> v);

// With mining, delta_minus = min(d(a,n), d(p,n)): the negative is measured
// against whichever of anchor/positive it sits closest to. A tie keeps the
// anchor.
TripletDistances triplet_distances(std::span<const double> anchor,
                                   std::span<const double> positive,
                                   std::span<const double> negative, bool mining);

// max(0, margin + delta_plus - delta_minus).
double triplet_loss(const TripletDistances& td, double margin);

// Easy exactly when the loss is zero.
Difficulty classify(const TripletDistances& td, double margin);

struct TripletGrad {
  double loss = 0.0;
  std::vector<double> d_anchor;
  std::vector<double> d_positive;
  std::vector<double> d_negative;
};

// Loss plus its subgradient with respect to the three embeddings. Inactive
// hinge yields all-zero gradients; active distance gradients use
// (u - v) / sqrt(||u - v||^2 + 1e-12) so coincident points stay finite.
TripletGrad triplet_loss_grad(std::span<const double> anchor,
                              std::span<const double> positive,
                              std::span<const double> negative, double margin,
                              bool mining);

}  // namespace dml
