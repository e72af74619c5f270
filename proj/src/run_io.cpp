#include "dml/run_io.hpp"

#include <cstdio>
#include <fstream>

namespace dml {

namespace {

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open file for writing: " + path);
  return out;
}

}  // namespace

void write_epochs_csv(const std::vector<EpochStats>& history, const std::string& path) {
  auto out = open_out(path);
  out << "epoch,margin,mean_loss,easy_proportion,median_effective_margin,triplet_count\n";
  for (const auto& s : history)
    out << s.epoch << ',' << g17(s.margin_used) << ',' << g17(s.mean_loss) << ','
        << g17(s.easy_proportion) << ',' << g17(s.median_effective_margin) << ','
        << s.triplet_count << "\n";
  if (!out) throw IoError("failed writing " + path);
}

void write_histograms_csv(const std::vector<EpochStats>& history,
                          const std::string& path) {
  auto out = open_out(path);
  out << "epoch,bin_lo,bin_hi,count\n";
  for (const auto& s : history) {
    for (std::size_t bin = 0; bin < kHistogramBins; ++bin) {
      const auto [lo, hi] = histogram_bin_edges(bin);
      out << s.epoch << ',' << g6(lo) << ',' << g6(hi) << ',' << s.histogram[bin]
          << "\n";
    }
  }
  if (!out) throw IoError("failed writing " + path);
}

void write_metrics_file(const MetricReport& report, const std::string& path) {
  auto out = open_out(path);
  write_metric_report(report, out);
  if (!out) throw IoError("failed writing " + path);
}

void write_metrics_trace_csv(
    const std::vector<std::pair<std::size_t, MetricReport>>& trace,
    const std::vector<std::size_t>& recall_ks, const std::string& path) {
  auto out = open_out(path);
  out << "epoch,auc";
  for (std::size_t k : recall_ks) out << ",recall@" << k;
  out << "\n";
  char buf[64];
  for (const auto& [epoch, report] : trace) {
    std::snprintf(buf, sizeof(buf), "%.6f", report.auc);
    out << epoch << ',' << buf;
    for (std::size_t k : recall_ks) {
      const auto it = report.recall_at.find(k);
      if (it == report.recall_at.end()) {
        out << ",nan";
      } else {
        std::snprintf(buf, sizeof(buf), "%.6f", it->second);
        out << ',' << buf;
      }
    }
    out << "\n";
  }
  if (!out) throw IoError("failed writing " + path);
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw ParseError("csv: missing column '" + name + "'");
}

CsvTable read_csv_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);

  auto split = [](const std::string& line) {
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
  };

  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line);
    if (table.header.empty()) {
      table.header = std::move(fields);
    } else {
      if (fields.size() != table.header.size())
        throw ParseError(path + " line " + std::to_string(line_no) +
                         ": expected " + std::to_string(table.header.size()) +
                         " fields, got " + std::to_string(fields.size()));
      table.rows.push_back(std::move(fields));
    }
  }
  if (table.header.empty()) throw ParseError(path + ": empty csv");
  return table;
}

}  // namespace dml
