#include "dml/loss.hpp"

#include <algorithm>
#include <cmath>

namespace dml {

namespace {

constexpr double kGradEps = 1e-12;  // under the root, gradient paths only

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw NumericError(std::string(what) + ": non-finite entry");
}

void check_margin(double margin) {
  if (!(margin >= 0.0)) throw ConfigError("margin must be non-negative");
}

}  // namespace

double distance(std::span<const double> u, std::span<const double> v) {
  require_same_length(u, v, "distance");
  require_finite(u, "distance");
  require_finite(v, "distance");
  return std::sqrt(squared_distance(u, v));
}

TripletDistances triplet_distances(std::span<const double> anchor,
                                   std::span<const double> positive,
                                   std::span<const double> negative, bool mining) {
  TripletDistances td;
  td.delta_plus = distance(anchor, positive);
  const double d_an = distance(anchor, negative);
  if (mining) {
    const double d_pn = distance(positive, negative);
    td.swapped = d_pn < d_an;
    td.delta_minus = td.swapped ? d_pn : d_an;
  } else {
    td.delta_minus = d_an;
  }
  td.effective_margin = td.delta_minus - td.delta_plus;
  return td;
}

double triplet_loss(const TripletDistances& td, double margin) {
  check_margin(margin);
  return std::max(0.0, margin + td.delta_plus - td.delta_minus);
}

Difficulty classify(const TripletDistances& td, double margin) {
  return triplet_loss(td, margin) == 0.0 ? Difficulty::Easy : Difficulty::Hard;
}

TripletGrad triplet_loss_grad(std::span<const double> anchor,
                              std::span<const double> positive,
                              std::span<const double> negative, double margin,
                              bool mining) {
  check_margin(margin);
  const TripletDistances td = triplet_distances(anchor, positive, negative, mining);

  TripletGrad out;
  out.loss = triplet_loss(td, margin);
  const std::size_t dim = anchor.size();
  out.d_anchor.assign(dim, 0.0);
  out.d_positive.assign(dim, 0.0);
  out.d_negative.assign(dim, 0.0);
  if (out.loss == 0.0) return out;

  // d/du ||u - v|| with the stabilized root.
  const double r_plus = std::sqrt(squared_distance(anchor, positive) + kGradEps);
  for (std::size_t i = 0; i < dim; ++i) {
    const double g = (anchor[i] - positive[i]) / r_plus;
    out.d_anchor[i] += g;
    out.d_positive[i] -= g;
  }

  // The negative-distance term flows through whichever pairing mining chose.
  auto base = td.swapped ? positive : anchor;
  auto& d_base = td.swapped ? out.d_positive : out.d_anchor;
  const double r_minus = std::sqrt(squared_distance(base, negative) + kGradEps);
  for (std::size_t i = 0; i < dim; ++i) {
    const double g = (base[i] - negative[i]) / r_minus;
    d_base[i] -= g;
    out.d_negative[i] += g;
  }
  return out;
}

}  // namespace dml
