#pragma once

#include <string>
#include <vector>

#include "dml/trainer.hpp"

namespace dml {

// epoch,margin,mean_loss,easy_proportion,median_effective_margin,triplet_count
void write_epochs_csv(const std::vector<EpochStats>& history, const std::string& path);

// epoch,bin_lo,bin_hi,count, one row per histogram bin per epoch.
void write_histograms_csv(const std::vector<EpochStats>& history, const std::string& path);

void write_metrics_file(const MetricReport& report, const std::string& path);

// epoch,auc,recall@k... for periodic evaluation traces.
void write_metrics_trace_csv(
    const std::vector<std::pair<std::size_t, MetricReport>>& trace,
    const std::vector<std::size_t>& recall_ks, const std::string& path);

// Header-indexed CSV reader; cells are kept verbatim so downstream files can
// copy values byte-for-byte.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;  // throws ParseError if absent
};

CsvTable read_csv_table(const std::string& path);

}  // namespace dml
