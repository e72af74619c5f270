#include "dml/cli.hpp"

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "dml/dataset.hpp"
#include "dml/eval.hpp"
#include "dml/model.hpp"
#include "dml/rng.hpp"
#include "dml/run_config.hpp"
#include "dml/run_io.hpp"
#include "support/checks.hpp"
#include "support/temp_dir.hpp"

using namespace dml;

namespace {

int run(std::initializer_list<std::string> args) {
  return cli::run(std::vector<std::string>(args));
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string base_config(const std::string& data_csv, const std::string& out_dir,
                        const std::string& scheduler_kind,
                        const std::string& scheduler_extra = "") {
  return std::string("{\n") +
         "  \"train\": {\"epochs\": 8, \"batch_triplets\": 16, \"seed\": 3,\n" +
         "             \"model_dims\": [4, 8, 3]},\n" +
         "  \"scheduler\": {\"kind\": \"" + scheduler_kind + "\"" + scheduler_extra +
         "},\n" +
         "  \"data\": {\"dataset\": \"" + data_csv + "\", \"train_fraction\": 0.5,\n" +
         "            \"split_seed\": 1},\n" +
         "  \"eval\": {\"pair_seed\": 2},\n" +
         "  \"output_dir\": \"" + out_dir + "\"\n" +
         "}\n";
}

void test_gen_data() {
  const std::string dir = testsup::fresh_dir("tmp_cli_gen");
  const std::string out = dir + "/d.csv";

  CHECK(run({"gen-data", "--classes", "20", "--per-class", "30", "--dim", "16",
             "--seed", "42", "--out", out}) == 0);
  const auto ds = load_csv(out);
  CHECK(ds.size() == 600);
  CHECK(ds.feature_dim() == 16);

  // byte-identical on rerun
  const std::string copy = dir + "/d2.csv";
  CHECK(run({"gen-data", "--classes", "20", "--per-class", "30", "--dim", "16",
             "--seed", "42", "--out", copy}) == 0);
  CHECK(testsup::read_file(out) == testsup::read_file(copy));

  // missing required flag: usage error
  CHECK(run({"gen-data", "--classes", "20", "--per-class", "30", "--dim", "16"}) ==
        cli::kExitUsage);

  // unwritable path: io error
  CHECK(run({"gen-data", "--classes", "2", "--per-class", "2", "--dim", "2", "--out",
             dir + "/no_such_dir/x.csv"}) == cli::kExitIo);
}

void test_train_and_schedulers() {
  const std::string dir = testsup::fresh_dir("tmp_cli_train");
  const std::string csv = dir + "/data.csv";
  CHECK(run({"gen-data", "--classes", "8", "--per-class", "6", "--dim", "4",
             "--center-scale", "3", "--spread", "0.3", "--seed", "7", "--out",
             csv}) == 0);

  struct Case {
    std::string kind;
    std::string extra;
    std::string dir;
  };
  const std::vector<Case> cases = {
      {"constant", ", \"mu0\": 0.3", dir + "/run_const"},
      {"linear", "", dir + "/run_linear"},
      {"dams", "", dir + "/run_dams"},
  };

  for (const auto& c : cases) {
    const std::string cfg = dir + "/" + c.kind + ".json";
    write_file(cfg, base_config(csv, c.dir, c.kind, c.extra));
    CHECK(run({"train", cfg}) == 0);

    const CsvTable epochs = read_csv_table(c.dir + "/epochs.csv");
    CHECK(epochs.rows.size() == 8);
    const std::size_t margin_col = epochs.column("margin");

    std::vector<double> margins;
    for (const auto& row : epochs.rows) margins.push_back(std::stod(row[margin_col]));

    if (c.kind == "constant") {
      for (double m : margins) CHECK(m == 0.3);
    } else if (c.kind == "linear") {
      for (std::size_t e = 0; e < margins.size(); ++e)
        CHECK(margins[e] == 0.01 * static_cast<double>(e));
    } else {
      for (std::size_t e = 1; e < margins.size(); ++e) {
        CHECK(margins[e] >= margins[e - 1]);
        const double step = margins[e] - margins[e - 1];
        CHECK(step <= 0.01 + 1e-12);
      }
    }

    // artifacts all in place
    CHECK(!testsup::read_file(c.dir + "/histograms.csv").empty());
    CHECK(!testsup::read_file(c.dir + "/model.txt").empty());
    const std::string metrics = testsup::read_file(c.dir + "/metrics.txt");
    CHECK_MSG(metrics.find("auc=") != std::string::npos, metrics);
    CHECK_MSG(metrics.find("recall@1=") != std::string::npos, metrics);
  }
}

void test_config_echo_reproduces() {
  const std::string dir = testsup::fresh_dir("tmp_cli_echo");
  const std::string csv = dir + "/data.csv";
  CHECK(run({"gen-data", "--classes", "6", "--per-class", "4", "--dim", "4",
             "--center-scale", "2", "--spread", "0.4", "--seed", "1", "--out",
             csv}) == 0);

  const std::string cfg = dir + "/run.json";
  write_file(cfg, base_config(csv, dir + "/run_a", "dams"));
  CHECK(run({"train", cfg}) == 0);

  // feed the resolved echo back in, into a different directory
  CHECK(run({"train", dir + "/run_a/config.json", "--out-dir", dir + "/run_b"}) == 0);
  for (const std::string name : {"epochs.csv", "histograms.csv", "model.txt"}) {
    const std::string a = testsup::read_file(dir + "/run_a/" + name);
    CHECK(!a.empty());
    CHECK_MSG(a == testsup::read_file(dir + "/run_b/" + name), name + " differs");
  }
}

void test_periodic_metrics() {
  const std::string dir = testsup::fresh_dir("tmp_cli_periodic");
  const std::string csv = dir + "/data.csv";
  CHECK(run({"gen-data", "--classes", "6", "--per-class", "4", "--dim", "4",
             "--center-scale", "3", "--spread", "0.3", "--seed", "8", "--out",
             csv}) == 0);

  const std::string cfg = dir + "/run.json";
  write_file(cfg,
             std::string("{\n") +
                 "  \"train\": {\"epochs\": 8, \"batch_triplets\": 16, \"seed\": 3,\n" +
                 "             \"model_dims\": [4, 8, 3], \"eval_every\": 3},\n" +
                 "  \"scheduler\": {\"kind\": \"constant\", \"mu0\": 0.3},\n" +
                 "  \"data\": {\"dataset\": \"" + csv + "\"},\n" +
                 "  \"output_dir\": \"" + dir + "/run\"\n" + "}\n");
  CHECK(run({"train", cfg}) == 0);

  // evaluations at epochs 3, 6 and the final epoch 8
  const CsvTable trace = read_csv_table(dir + "/run/metrics_trace.csv");
  CHECK(trace.rows.size() == 3);
  CHECK(trace.rows[0][0] == "3");
  CHECK(trace.rows[2][0] == "8");
  CHECK(trace.header[1] == "auc");
  CHECK(!testsup::read_file(dir + "/run/metrics.txt").empty());
}

void test_config_errors() {
  const std::string dir = testsup::fresh_dir("tmp_cli_cfg");

  // unknown keys are named
  try {
    parse_run_config_text(R"({"train": {"epochs": 2, "model_dims": [2,2],
                              "typo_key": 1},
                              "scheduler": {"kind": "dams"},
                              "data": {"dataset": "x.csv"},
                              "output_dir": "o"})",
                          "test");
    CHECK_MSG(false, "expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK_MSG(std::string(e.what()).find("typo_key") != std::string::npos, e.what());
  }

  // missing file -> io error; malformed json -> config-class exit
  CHECK(run({"train", dir + "/absent.json"}) == cli::kExitIo);
  write_file(dir + "/broken.json", "{ not json");
  CHECK(run({"train", dir + "/broken.json"}) == cli::kExitConfig);

  write_file(dir + "/unknown.json",
             R"({"train": {"model_dims": [2,2]}, "scheduler": {"kind": "dams"},
                 "data": {"dataset": "x.csv"}, "output_dir": "o", "windows": 95})");
  CHECK(run({"train", dir + "/unknown.json"}) == cli::kExitConfig);

  // negative integers must not wrap into unsigned fields
  write_file(dir + "/negative.json",
             R"({"train": {"epochs": -1, "model_dims": [2,2]},
                 "scheduler": {"kind": "dams"},
                 "data": {"dataset": "x.csv"}, "output_dir": "o"})");
  CHECK(run({"train", dir + "/negative.json"}) == cli::kExitConfig);

  CHECK(run({"definitely-not-a-subcommand"}) == cli::kExitUsage);
}

void test_eval_cmd() {
  const std::string dir = testsup::fresh_dir("tmp_cli_eval");
  const std::string csv = dir + "/tiny.csv";

  // 2 classes x 2 samples
  write_file(csv,
             "label,f0,f1\n"
             "a,1.0,0.0\na,0.9,0.1\nb,-1.0,0.0\nb,-0.9,-0.1\n");
  save_model(init_model({2, 4, 2}, 5), dir + "/model.txt");

  CHECK(run({"eval", "--model", dir + "/model.txt", "--data", csv, "--out",
             dir + "/report.txt"}) == 0);
  const std::string report = testsup::read_file(dir + "/report.txt");
  CHECK_MSG(report.find("auc=") != std::string::npos, report);
  CHECK_MSG(report.find("recall@1=") != std::string::npos, report);
  // defaults are clamped: recall@4 needs 5 samples, we have 4
  CHECK(report.find("recall@4=") == std::string::npos);

  // explicit infeasible k: configuration error
  CHECK(run({"eval", "--model", dir + "/model.txt", "--data", csv, "--k", "9"}) ==
        cli::kExitConfig);

  // dimension mismatch is named
  save_model(init_model({3, 4, 2}, 5), dir + "/model3.txt");
  CHECK(run({"eval", "--model", dir + "/model3.txt", "--data", csv}) ==
        cli::kExitConfig);
}

void test_random_model_auc_near_half() {
  // statistical oracle: with essentially classless data, a freshly
  // initialized model cannot separate pairs; AUC stays near 1/2
  SyntheticSpec spec;
  spec.num_classes = 150;
  spec.samples_per_class = 4;
  spec.feature_dim = 8;
  spec.center_scale = 0.05;  // class signal far below the noise floor
  spec.spread = 1.0;
  const auto ds = generate_synthetic(spec, 77);

  for (std::uint64_t seed : {101, 202, 303}) {
    const auto model = init_model({8, 16, 4}, seed);
    const Matrix emb = forward(model, ds.features);
    const auto report = evaluate(emb, ds, seed, {1});
    CHECK_MSG(std::fabs(report.auc - 0.5) <= 0.1,
              "auc = " + std::to_string(report.auc));
  }
}

void test_report_cmd() {
  const std::string dir = testsup::fresh_dir("tmp_cli_report");
  const std::string csv = dir + "/data.csv";
  CHECK(run({"gen-data", "--classes", "6", "--per-class", "4", "--dim", "4",
             "--center-scale", "3", "--spread", "0.3", "--seed", "2", "--out",
             csv}) == 0);
  const std::string cfg = dir + "/run.json";
  write_file(cfg, base_config(csv, dir + "/run", "dams"));
  CHECK(run({"train", cfg}) == 0);
  CHECK(run({"report", dir + "/run"}) == 0);

  const CsvTable margin_curve = read_csv_table(dir + "/run/margin_curve.csv");
  CHECK(margin_curve.rows.size() == 8);  // one row per epoch
  CHECK(margin_curve.header == (std::vector<std::string>{"epoch", "value"}));
  double last = -1.0;
  for (const auto& row : margin_curve.rows) {
    const double v = std::stod(row[1]);
    CHECK(v >= last);
    last = v;
  }
  CHECK(read_csv_table(dir + "/run/easy_proportion_curve.csv").rows.size() == 8);
  CHECK(read_csv_table(dir + "/run/median_margin_curve.csv").rows.size() == 8);

  CHECK(run({"report", dir + "/empty"}) == cli::kExitIo);
}

void test_sweep_cmd() {
  const std::string dir = testsup::fresh_dir("tmp_cli_sweep");
  const std::string csv = dir + "/data.csv";
  CHECK(run({"gen-data", "--classes", "6", "--per-class", "4", "--dim", "4",
             "--center-scale", "3", "--spread", "0.3", "--seed", "4", "--out",
             csv}) == 0);

  const std::string cfg = dir + "/sweep.json";
  write_file(cfg, std::string("{\n") +
                      "  \"train\": {\"epochs\": 4, \"batch_triplets\": 16,\n" +
                      "             \"seed\": 11, \"model_dims\": [4, 6, 3]},\n" +
                      "  \"data\": {\"dataset\": \"" + csv + "\"},\n" +
                      "  \"sweep\": {\"mu0\": [0.0, -1.0], \"threshold\": [0.9],\n" +
                      "             \"dams_step\": [0.01], \"repetitions\": 2},\n" +
                      "  \"output_dir\": \"" + dir + "/sweep_out\"\n" + "}\n");
  CHECK(run({"sweep", cfg}) == 0);

  const CsvTable summary = read_csv_table(dir + "/sweep_out/summary.csv");
  CHECK(summary.rows.size() == 4);  // 2 cells x 2 repetitions, failures included
  const std::size_t status = summary.column("status");
  std::size_t ok = 0, failed = 0;
  for (const auto& row : summary.rows) {
    if (row[status] == "ok") ++ok;
    else ++failed;
  }
  CHECK(ok == 2);       // mu0 = 0.0 runs
  CHECK(failed == 2);   // mu0 = -1.0 rejected per run, sweep continued
  CHECK(!testsup::read_file(dir + "/sweep_out/run_000_rep_0/epochs.csv").empty());

  // empty grid values are rejected up front
  write_file(cfg, std::string("{\"train\": {\"model_dims\": [4,6,3]},") +
                      "\"data\": {\"dataset\": \"" + csv + "\"}," +
                      "\"sweep\": {\"mu0\": [], \"threshold\": [0.9]," +
                      "\"dams_step\": [0.01]}," + "\"output_dir\": \"" + dir +
                      "/sweep_bad\"}");
  CHECK(run({"sweep", cfg}) == cli::kExitConfig);
}

void test_sweep_paper_grid() {
  // the reference grid: 2 x 6 x 4 = 48 configurations, rows laid out in
  // mu0-major order so the summary sorts into the published table shape
  const std::string dir = testsup::fresh_dir("tmp_cli_grid");
  const std::string csv = dir + "/data.csv";
  CHECK(run({"gen-data", "--classes", "4", "--per-class", "3", "--dim", "3",
             "--center-scale", "3", "--spread", "0.3", "--seed", "6", "--out",
             csv}) == 0);

  const std::string cfg = dir + "/sweep.json";
  write_file(cfg,
             std::string("{\n") +
                 "  \"train\": {\"epochs\": 2, \"batch_triplets\": 16, \"seed\": 1,\n" +
                 "             \"model_dims\": [3, 4, 2]},\n" +
                 "  \"data\": {\"dataset\": \"" + csv + "\"},\n" +
                 "  \"sweep\": {\"mu0\": [0.0, 0.3],\n" +
                 "             \"threshold\": [0.5, 0.8, 0.85, 0.9, 0.95, 0.99],\n" +
                 "             \"dams_step\": [0.01, 0.02, 0.05, 0.1]},\n" +
                 "  \"output_dir\": \"" + dir + "/grid_out\"\n" + "}\n");
  CHECK(run({"sweep", cfg}) == 0);

  const CsvTable summary = read_csv_table(dir + "/grid_out/summary.csv");
  CHECK(summary.rows.size() == 48);
  CHECK(summary.header[0] == "mu0");
  const std::size_t status = summary.column("status");
  for (const auto& row : summary.rows) CHECK(row[status] == "ok");

  // mu0-major, then threshold, then step
  const std::size_t mu0_col = summary.column("mu0");
  const std::size_t t_col = summary.column("t");
  CHECK(summary.rows[0][mu0_col] == "0");
  CHECK(summary.rows[23][mu0_col] == "0");
  CHECK(summary.rows[24][mu0_col] == "0.3");
  CHECK(summary.rows[0][t_col] == "0.5");
  CHECK(summary.rows[4][t_col] == "0.8");
}

}  // namespace

int main() {
  test_gen_data();
  test_train_and_schedulers();
  test_config_echo_reproduces();
  test_periodic_metrics();
  test_config_errors();
  test_eval_cmd();
  test_random_model_auc_near_half();
  test_report_cmd();
  test_sweep_cmd();
  test_sweep_paper_grid();
  return testsup::finish("test_cli");
}
