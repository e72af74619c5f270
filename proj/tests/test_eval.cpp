#include "dml/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "dml/rng.hpp"
#include "support/checks.hpp"

using namespace dml;

namespace {

// O(P*N) oracle: direct comparison count with ties worth 1/2.
double auc_brute_force(const std::vector<EvalPair>& pairs,
                       const std::vector<double>& distances) {
  double wins = 0.0;
  std::size_t comparisons = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!pairs[i].is_positive) continue;
    for (std::size_t j = 0; j < pairs.size(); ++j) {
      if (pairs[j].is_positive) continue;
      ++comparisons;
      if (distances[i] < distances[j]) wins += 1.0;
      else if (distances[i] == distances[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(comparisons);
}

// Brute-force leave-one-out recall: full sort of every distance list.
double recall_brute_force(const Matrix& emb, const std::vector<std::string>& labels,
                          std::size_t k) {
  const std::size_t n = emb.rows();
  std::size_t hits = 0;
  for (std::size_t a = 0; a < n; ++a) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t b = 0; b < n; ++b) {
      if (b == a) continue;
      double sq = 0.0;
      for (std::size_t c = 0; c < emb.cols(); ++c) {
        const double d = emb(a, c) - emb(b, c);
        sq += d * d;
      }
      all.emplace_back(std::sqrt(sq), b);
    }
    std::sort(all.begin(), all.end());
    bool hit = false;
    for (std::size_t i = 0; i < k; ++i)
      if (labels[all[i].second] == labels[a]) hit = true;
    if (hit) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

LabeledDataset balanced_dataset(std::size_t classes, std::size_t per_class,
                                std::size_t dim, Rng& rng) {
  LabeledDataset ds;
  ds.features = Matrix(classes * per_class, dim);
  for (std::size_t i = 0; i < ds.features.size(); ++i)
    ds.features.data()[i] = rng.uniform(-1.0, 1.0);
  for (std::size_t c = 0; c < classes; ++c)
    for (std::size_t s = 0; s < per_class; ++s)
      ds.labels.push_back(std::to_string(c));
  return ds;
}

void test_pair_protocol() {
  Rng rng(5);
  const auto ds = balanced_dataset(12, 4, 3, rng);
  const auto pairs = generate_eval_pairs(ds, 77);
  CHECK(pairs.size() == 24);  // 2K

  std::size_t positives = 0;
  std::set<std::string> anchor_classes;
  bool valid = true;
  for (const auto& p : pairs) {
    if (p.is_positive) {
      ++positives;
      if (ds.labels[p.first] != ds.labels[p.second] || p.first == p.second)
        valid = false;
      anchor_classes.insert(ds.labels[p.first]);
    } else if (ds.labels[p.first] == ds.labels[p.second]) {
      valid = false;
    }
  }
  CHECK(valid);
  CHECK(positives == 12);
  CHECK(anchor_classes.size() == 12);  // one anchor per class

  // positive and negative pair of a class share the anchor
  for (std::size_t c = 0; c < pairs.size(); c += 2)
    CHECK(pairs[c].first == pairs[c + 1].first);

  // determinism
  const auto again = generate_eval_pairs(ds, 77);
  bool identical = true;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (pairs[i].first != again[i].first || pairs[i].second != again[i].second ||
        pairs[i].is_positive != again[i].is_positive)
      identical = false;
  CHECK(identical);

  LabeledDataset singleton;
  singleton.features = Matrix(3, 1);
  singleton.labels = {"a", "a", "b"};
  CHECK_THROWS(ValueError, generate_eval_pairs(singleton, 0));
}

void test_auc() {
  auto mk = [](std::vector<double> pos, std::vector<double> neg) {
    std::vector<EvalPair> pairs;
    std::vector<double> dists;
    for (double d : pos) {
      pairs.push_back({0, 1, true});
      dists.push_back(d);
    }
    for (double d : neg) {
      pairs.push_back({0, 2, false});
      dists.push_back(d);
    }
    return std::make_pair(pairs, dists);
  };

  {
    auto [pairs, dists] = mk({0.1, 0.2}, {0.8, 0.9});
    CHECK(auc_roc(pairs, dists) == 1.0);  // perfect separation
  }
  {
    auto [pairs, dists] = mk({0.5}, {0.5});
    CHECK(auc_roc(pairs, dists) == 0.5);  // all ties
  }
  {
    auto [pairs, dists] = mk({0.1, 0.7}, {0.4, 0.9});
    CHECK(auc_roc(pairs, dists) == 0.75);  // (1+1+0+1)/4
  }
  {
    auto [pairs, dists] = mk({0.5}, {});
    CHECK_THROWS(ValueError, auc_roc(pairs, dists));
  }

  // oracle equivalence on 100 random instances, with deliberate tie mass
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t total = 2 + rng.below(199);
    std::vector<EvalPair> pairs;
    std::vector<double> dists;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < total; ++i) {
      const bool is_pos = rng.next_double() < 0.5;
      pos += is_pos ? 1 : 0;
      pairs.push_back({i, i + 1, is_pos});
      // quantized distances so exact ties actually occur
      dists.push_back(static_cast<double>(rng.below(12)) / 8.0);
    }
    if (pos == 0 || pos == total) {
      --trial;
      continue;
    }
    const double fast = auc_roc(pairs, dists);
    const double slow = auc_brute_force(pairs, dists);
    if (std::fabs(fast - slow) > 1e-12) {
      CHECK_MSG(false, "auc mismatch: " + std::to_string(fast) + " vs " +
                           std::to_string(slow));
      return;
    }
    // antisymmetry: swapping pair polarity maps AUC to 1 - AUC
    auto flipped = pairs;
    for (auto& p : flipped) p.is_positive = !p.is_positive;
    if (std::fabs(auc_roc(flipped, dists) - (1.0 - fast)) > 1e-12) {
      CHECK_MSG(false, "antisymmetry violated");
      return;
    }
  }
  CHECK(true);
}

void test_recall() {
  // two samples, same class: the only neighbor always matches
  {
    Matrix emb(2, 2);
    emb(0, 0) = 1.0;
    emb(1, 1) = 1.0;
    CHECK(recall_at_k(emb, {"a", "a"}, 1) == 1.0);
  }

  // alternating classes on a line: nearest neighbor is always wrong
  {
    Matrix emb(4, 1);
    for (std::size_t i = 0; i < 4; ++i) emb(i, 0) = static_cast<double>(i);
    const std::vector<std::string> labels{"A", "B", "A", "B"};
    CHECK(recall_at_k(emb, labels, 1) == 0.0);
    CHECK(recall_at_k(emb, labels, 1) == recall_brute_force(emb, labels, 1));
  }

  // oracle equivalence and monotonicity over random instances
  Rng rng(67);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t classes = 2 + rng.below(8);
    const std::size_t per_class = 2 + rng.below(6);
    const std::size_t n = classes * per_class;
    if (n > 500) {
      --trial;
      continue;
    }
    const auto ds = balanced_dataset(classes, per_class, 1 + rng.below(4), rng);

    double previous = -1.0;
    for (std::size_t k : {1, 2, 4, 8}) {
      if (k >= n) break;
      const double fast = recall_at_k(ds.features, ds.labels, k);
      const double slow = recall_brute_force(ds.features, ds.labels, k);
      if (fast != slow) {
        CHECK_MSG(false, "recall mismatch at k=" + std::to_string(k));
        return;
      }
      if (fast < previous) {
        CHECK_MSG(false, "recall not monotone in k");
        return;
      }
      previous = fast;
    }
  }
  CHECK(true);

  Matrix emb(3, 2, 0.5);
  CHECK_THROWS(ConfigError, recall_at_k(emb, {"a", "a", "b"}, 3));
  CHECK_THROWS(ConfigError, recall_at_k(emb, {"a", "a", "b"}, 0));
}

void test_report_format() {
  MetricReport report;
  report.auc = 0.912345678;
  report.recall_at[1] = 0.25;
  report.recall_at[8] = 1.0;
  const std::string text = metric_report_to_string(report);
  CHECK(text == "auc=0.912346\nrecall@1=0.250000\nrecall@8=1.000000\n");
}

}  // namespace

int main() {
  test_pair_protocol();
  test_auc();
  test_recall();
  test_report_format();
  return testsup::finish("test_eval");
}
