#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "dml/dataset.hpp"

namespace dml {

// One verification pair; a positive pair joins two samples of one class.
struct EvalPair {
  std::size_t first = 0;
  std::size_t second = 0;
  bool is_positive = false;
};

struct MetricReport {
  double auc = 0.0;
  std::map<std::size_t, double> recall_at;
};

// Class-balanced pair protocol: one anchor per class, paired once with a
// classmate and once with a sample from another class, so a K-class dataset
// yields exactly 2K pairs. Deterministic per seed.
std::vector<EvalPair> generate_eval_pairs(const LabeledDataset& ds, std::uint64_t seed);

// Probability that a random positive pair sits at a strictly smaller
// distance than a random negative pair, ties counted 1/2 (normalized
// Mann-Whitney on score = -distance, computed from average ranks).
double auc_roc(const std::vector<EvalPair>& pairs, const std::vector<double>& distances);

// Leave-one-out retrieval: fraction of samples whose k nearest other samples
// (Euclidean, ties by ascending index) include one of the same class.
double recall_at_k(const Matrix& embeddings, const std::vector<std::string>& labels,
                   std::size_t k);

// Generates pairs with pair_seed and fills a report for the requested recall
// cutoffs, given the already-embedded dataset.
MetricReport evaluate(const Matrix& embeddings, const LabeledDataset& ds,
                      std::uint64_t pair_seed, const std::vector<std::size_t>& recall_ks);

// Flat key-value block: `auc=<v>` then `recall@k=<v>` lines, 6 decimals.
void write_metric_report(const MetricReport& report, std::ostream& out);
std::string metric_report_to_string(const MetricReport& report);

}  // namespace dml
