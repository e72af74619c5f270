#include "dml/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <sstream>

#include "dml/loss.hpp"
#include "dml/rng.hpp"

namespace dml {

std::vector<EvalPair> generate_eval_pairs(const LabeledDataset& ds, std::uint64_t seed) {
  const auto classes = classes_of(ds);
  if (classes.size() < 2)
    throw ValueError("generate_eval_pairs: need at least 2 classes");
  for (const auto& [label, members] : classes)
    if (members.size() < 2)
      throw ValueError("generate_eval_pairs: class '" + label +
                       "' has a single sample; remove singletons first");

  Rng rng(mix_seed(seed, 0x7061697273ULL));
  const std::size_t n = ds.size();
  std::vector<EvalPair> pairs;
  pairs.reserve(2 * classes.size());
  for (const auto& [label, members] : classes) {
    const std::size_t anchor_pos = static_cast<std::size_t>(rng.below(members.size()));
    const std::size_t anchor = members[anchor_pos];

    std::size_t p = static_cast<std::size_t>(rng.below(members.size() - 1));
    if (p >= anchor_pos) ++p;
    pairs.push_back({anchor, members[p], true});

    std::size_t r = static_cast<std::size_t>(rng.below(n - members.size()));
    for (std::size_t m : members) {
      if (m <= r) ++r;
      else break;
    }
    pairs.push_back({anchor, r, false});
  }
  return pairs;
}

double auc_roc(const std::vector<EvalPair>& pairs, const std::vector<double>& distances) {
  if (pairs.size() != distances.size())
    throw ShapeError("auc_roc: pairs and distances lengths differ");
  std::size_t positives = 0;
  for (const auto& p : pairs) positives += p.is_positive ? 1 : 0;
  const std::size_t negatives = pairs.size() - positives;
  if (positives == 0 || negatives == 0)
    throw ValueError("auc_roc: undefined without both positive and negative pairs");

  // Rank by distance descending (score = -distance ascending), averaging
  // ranks across exact ties, then apply the Mann-Whitney identity.
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return distances[a] > distances[b];
  });

  double positive_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && distances[order[j]] == distances[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k)
      if (pairs[order[k]].is_positive) positive_rank_sum += avg_rank;
    i = j;
  }

  const double p = static_cast<double>(positives);
  const double q = static_cast<double>(negatives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * q);
}

double recall_at_k(const Matrix& embeddings, const std::vector<std::string>& labels,
                   std::size_t k) {
  const std::size_t n = embeddings.rows();
  if (labels.size() != n)
    throw ShapeError("recall_at_k: embeddings and labels lengths differ");
  if (n < 2) throw ConfigError("recall_at_k: need at least 2 samples");
  if (k < 1 || k >= n)
    throw ConfigError("recall_at_k: k must satisfy 1 <= k <= n-1 (k=" +
                      std::to_string(k) + ", n=" + std::to_string(n) + ")");

  std::size_t hits = 0;
  std::vector<std::pair<double, std::size_t>> others;
  others.reserve(n - 1);
  for (std::size_t a = 0; a < n; ++a) {
    others.clear();
    for (std::size_t b = 0; b < n; ++b) {
      if (b == a) continue;
      others.emplace_back(std::sqrt(squared_distance(embeddings.row(a), embeddings.row(b))), b);
    }
    std::partial_sort(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(k),
                      others.end());
    for (std::size_t i = 0; i < k; ++i) {
      if (labels[others[i].second] == labels[a]) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

MetricReport evaluate(const Matrix& embeddings, const LabeledDataset& ds,
                      std::uint64_t pair_seed, const std::vector<std::size_t>& recall_ks) {
  if (embeddings.rows() != ds.size())
    throw ShapeError("evaluate: embeddings row count differs from dataset size");

  const auto pairs = generate_eval_pairs(ds, pair_seed);
  std::vector<double> dists;
  dists.reserve(pairs.size());
  for (const auto& p : pairs)
    dists.push_back(
        std::sqrt(squared_distance(embeddings.row(p.first), embeddings.row(p.second))));

  MetricReport report;
  report.auc = auc_roc(pairs, dists);
  for (std::size_t k : recall_ks)
    report.recall_at[k] = recall_at_k(embeddings, ds.labels, k);
  return report;
}

void write_metric_report(const MetricReport& report, std::ostream& out) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", report.auc);
  out << "auc=" << buf << "\n";
  for (const auto& [k, v] : report.recall_at) {
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    out << "recall@" << k << "=" << buf << "\n";
  }
}

std::string metric_report_to_string(const MetricReport& report) {
  std::ostringstream ss;
  write_metric_report(report, ss);
  return ss.str();
}

}  // namespace dml
