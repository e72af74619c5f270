#include "dml/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "dml/rng.hpp"

namespace dml {

namespace {

void validate_spec(const SyntheticSpec& spec) {
  if (spec.num_classes < 1) throw ConfigError("synthetic: num_classes must be >= 1");
  if (spec.samples_per_class < 2)
    throw ConfigError("synthetic: samples_per_class must be >= 2");
  if (spec.feature_dim < 1) throw ConfigError("synthetic: feature_dim must be >= 1");
  if (!(spec.center_scale > 0.0)) throw ConfigError("synthetic: center_scale must be > 0");
  if (!(spec.spread >= 0.0)) throw ConfigError("synthetic: spread must be >= 0");
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_feature(const std::string& token, std::size_t line_no) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || end != begin + token.size())
    throw ParseError("csv line " + std::to_string(line_no) +
                     ": feature is not a number: '" + token + "'");
  if (!std::isfinite(v))
    throw ParseError("csv line " + std::to_string(line_no) +
                     ": feature is not finite: '" + token + "'");
  return v;
}

// Uniform index over all samples outside `members` (ascending). Maps a draw
// from [0, n - |members|) past the excluded indices.
std::size_t draw_outside(Rng& rng, std::size_t n, const std::vector<std::size_t>& members) {
  std::size_t r = static_cast<std::size_t>(rng.below(n - members.size()));
  for (std::size_t m : members) {
    if (m <= r) ++r;
    else break;
  }
  return r;
}

}  // namespace

std::vector<std::pair<std::string, std::vector<std::size_t>>> classes_of(
    const LabeledDataset& ds) {
  std::vector<std::pair<std::string, std::vector<std::size_t>>> classes;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < ds.labels.size(); ++i) {
    auto [it, inserted] = index.try_emplace(ds.labels[i], classes.size());
    if (inserted) classes.push_back({ds.labels[i], {}});
    classes[it->second].second.push_back(i);
  }
  return classes;
}

LabeledDataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  validate_spec(spec);
  Rng rng(mix_seed(seed, 0x64617461ULL));

  const std::size_t d = spec.feature_dim;
  Matrix centers(spec.num_classes, d);
  for (std::size_t i = 0; i < centers.size(); ++i)
    centers.data()[i] = rng.uniform(-spec.center_scale, spec.center_scale);

  LabeledDataset ds;
  ds.features = Matrix(spec.num_classes * spec.samples_per_class, d);
  ds.labels.reserve(ds.features.rows());
  std::size_t row = 0;
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    const std::string label = std::to_string(c);
    for (std::size_t s = 0; s < spec.samples_per_class; ++s, ++row) {
      for (std::size_t k = 0; k < d; ++k)
        ds.features(row, k) = centers(c, k) + spec.spread * rng.gaussian();
      ds.labels.push_back(label);
    }
  }
  return ds;
}

LabeledDataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file: " + path);

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("csv: empty file: " + path);
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = split_fields(line);
  if (header.empty() || header[0] != "label")
    throw ParseError("csv line 1: header must start with 'label'");
  if (header.size() < 2)
    throw ParseError("csv line 1: header declares no feature columns");
  const std::size_t d = header.size() - 1;

  std::vector<std::string> labels;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != d + 1)
      throw ParseError("csv line " + std::to_string(line_no) + ": expected " +
                       std::to_string(d + 1) + " fields, got " +
                       std::to_string(fields.size()));
    if (fields[0].empty())
      throw ParseError("csv line " + std::to_string(line_no) + ": empty label");
    labels.push_back(fields[0]);
    for (std::size_t k = 1; k < fields.size(); ++k)
      values.push_back(parse_feature(fields[k], line_no));
  }
  if (labels.empty()) throw ParseError("csv: no samples in " + path);

  LabeledDataset ds;
  ds.features = Matrix(labels.size(), d);
  std::copy(values.begin(), values.end(), ds.features.data());
  ds.labels = std::move(labels);
  return ds;
}

void save_csv(const LabeledDataset& ds, const std::string& path) {
  for (const auto& label : ds.labels)
    if (label.empty() || label.find(',') != std::string::npos)
      throw ValueError("save_csv: labels must be non-empty and comma-free ('" +
                       label + "')");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open dataset file for writing: " + path);
  out << "label";
  for (std::size_t k = 0; k < ds.feature_dim(); ++k) out << ",f" << k;
  out << "\n";
  char buf[64];
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out << ds.labels[i];
    const auto row = ds.features.row(i);
    for (double v : row) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << ',' << buf;
    }
    out << "\n";
  }
  if (!out) throw IoError("failed writing dataset file: " + path);
}

LabeledDataset remove_singletons(const LabeledDataset& ds) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& label : ds.labels) ++counts[label];

  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (counts[ds.labels[i]] >= 2) keep.push_back(i);
  if (keep.empty())
    throw ValueError("remove_singletons: no class has two or more samples");

  LabeledDataset out;
  out.features = Matrix(keep.size(), ds.feature_dim());
  out.labels.reserve(keep.size());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const auto src = ds.features.row(keep[r]);
    std::copy(src.begin(), src.end(), out.features.row(r).begin());
    out.labels.push_back(ds.labels[keep[r]]);
  }
  return out;
}

bool has_singleton_class(const LabeledDataset& ds) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& label : ds.labels) ++counts[label];
  for (const auto& [_, c] : counts)
    if (c < 2) return true;
  return false;
}

std::pair<LabeledDataset, LabeledDataset> split_by_class(const LabeledDataset& ds,
                                                         double train_fraction,
                                                         std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("split_by_class: train_fraction must lie in (0,1)");
  auto classes = classes_of(ds);
  const std::size_t num_classes = classes.size();
  if (num_classes < 2) throw ConfigError("split_by_class: need at least 2 classes");

  std::vector<std::size_t> order(num_classes);
  for (std::size_t i = 0; i < num_classes; ++i) order[i] = i;
  Rng rng(mix_seed(seed, 0x73706c6974ULL));
  rng.shuffle(order);

  const auto train_classes = static_cast<std::size_t>(
      std::ceil(train_fraction * static_cast<double>(num_classes)));
  if (train_classes == 0 || train_classes >= num_classes)
    throw ConfigError("split_by_class: fraction " + std::to_string(train_fraction) +
                      " leaves one side with zero classes (" +
                      std::to_string(train_classes) + " of " +
                      std::to_string(num_classes) + " to train)");

  std::vector<bool> in_train(ds.size(), false);
  for (std::size_t i = 0; i < train_classes; ++i)
    for (std::size_t sample : classes[order[i]].second) in_train[sample] = true;

  auto take = [&](bool want_train) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < ds.size(); ++i)
      if (in_train[i] == want_train) keep.push_back(i);
    LabeledDataset out;
    out.features = Matrix(keep.size(), ds.feature_dim());
    out.labels.reserve(keep.size());
    for (std::size_t r = 0; r < keep.size(); ++r) {
      const auto src = ds.features.row(keep[r]);
      std::copy(src.begin(), src.end(), out.features.row(r).begin());
      out.labels.push_back(ds.labels[keep[r]]);
    }
    return out;
  };
  return {take(true), take(false)};
}

std::vector<Triplet> sample_triplets(const LabeledDataset& ds, std::uint64_t seed,
                                     std::uint64_t epoch) {
  const auto classes = classes_of(ds);
  std::unordered_map<std::string, std::size_t> class_index;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    if (classes[c].second.size() < 2)
      throw ValueError("sample_triplets: class '" + classes[c].first +
                       "' has a single sample; remove singletons first");
    class_index.emplace(classes[c].first, c);
  }
  if (classes.size() < 2)
    throw ValueError("sample_triplets: need at least 2 classes");

  const std::size_t n = ds.size();
  Rng rng(mix_seed(seed, epoch));
  std::vector<Triplet> triplets;
  triplets.reserve(n);
  for (std::size_t a = 0; a < n; ++a) {
    const auto& members = classes[class_index.at(ds.labels[a])].second;

    // positive: uniform over the anchor's classmates
    const std::size_t a_pos = static_cast<std::size_t>(
        std::lower_bound(members.begin(), members.end(), a) - members.begin());
    std::size_t p = static_cast<std::size_t>(rng.below(members.size() - 1));
    if (p >= a_pos) ++p;

    triplets.push_back({a, members[p], draw_outside(rng, n, members)});
  }
  rng.shuffle(triplets);
  return triplets;
}

}  // namespace dml
