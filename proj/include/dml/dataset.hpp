#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dml/loss.hpp"
#include "dml/matrix.hpp"

namespace dml {

// Feature vectors with per-sample class labels. Labels are opaque tokens;
// a "class" is one identity and may hold many samples.
struct LabeledDataset {
  Matrix features;                  // n x d
  std::vector<std::string> labels;  // length n

  std::size_t size() const { return labels.size(); }
  std::size_t feature_dim() const { return features.cols(); }
};

// Gaussian clusters around uniformly placed class centers; stands in for the
// real image datasets, which enter through the CSV path instead.
struct SyntheticSpec {
  std::size_t num_classes = 0;
  std::size_t samples_per_class = 0;  // >= 2 so every class can form triplets
  std::size_t feature_dim = 0;
  double center_scale = 1.0;  // centers uniform in [-center_scale, center_scale]^d
  double spread = 1.0;        // within-class standard deviation
};

LabeledDataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

// CSV schema: header `label,f0,...,f{d-1}`, one sample per line, label any
// non-empty comma-free token. LF or CRLF.
LabeledDataset load_csv(const std::string& path);
void save_csv(const LabeledDataset& ds, const std::string& path);

// Classes with a single sample cannot form triplets or positive pairs.
LabeledDataset remove_singletons(const LabeledDataset& ds);

bool has_singleton_class(const LabeledDataset& ds);

// Class-disjoint split: classes are shuffled by seed, the first
// ceil(train_fraction * K) go to train, the rest to test. All samples of a
// class land on one side.
std::pair<LabeledDataset, LabeledDataset> split_by_class(const LabeledDataset& ds,
                                                         double train_fraction,
                                                         std::uint64_t seed);

// One triplet per sample as anchor: positive uniform from the anchor's class
// (excluding the anchor), negative uniform over all other-class samples,
// output order shuffled. Deterministic in (seed, epoch).
std::vector<Triplet> sample_triplets(const LabeledDataset& ds, std::uint64_t seed,
                                     std::uint64_t epoch);

// Distinct labels in first-appearance order, with their member sample
// indices (ascending). Shared by splitting, sampling, and evaluation.
std::vector<std::pair<std::string, std::vector<std::size_t>>> classes_of(
    const LabeledDataset& ds);

}  // namespace dml
