#include "dml/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "dml/dataset.hpp"
#include "dml/rng.hpp"
#include "dml/run_config.hpp"
#include "dml/run_io.hpp"
#include "dml/trainer.hpp"

namespace dml::cli {

namespace {

namespace fs = std::filesystem;

std::string format_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out << text;
  if (!out) throw IoError("failed writing " + path);
}

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

struct LoadedData {
  LabeledDataset train;
  std::optional<LabeledDataset> test;
};

LoadedData load_data(const DataConfig& config) {
  LoadedData data;
  if (config.uses_split()) {
    const LabeledDataset full = remove_singletons(load_csv(config.dataset));
    auto [train, test] = split_by_class(full, config.train_fraction, config.split_seed);
    data.train = std::move(train);
    data.test = std::move(test);
  } else {
    data.train = remove_singletons(load_csv(config.train_dataset));
    if (!config.test_dataset.empty())
      data.test = remove_singletons(load_csv(config.test_dataset));
  }
  return data;
}

// Default recall cutoffs are clamped to what the test set can support;
// explicitly configured ones are enforced as-is.
std::vector<std::size_t> resolve_recall_ks(const EvalConfig& eval,
                                           std::size_t test_size) {
  if (eval.ks_explicit) return eval.recall_ks;
  std::vector<std::size_t> ks;
  for (std::size_t k : eval.recall_ks)
    if (k + 1 <= test_size) ks.push_back(k);
  return ks;
}

struct RunOutcome {
  TrainResult result;
  bool evaluated = false;
};

RunOutcome execute_run(RunConfig config, const std::string& out_dir) {
  LoadedData data = load_data(config.data);

  EvalHook hook;
  const bool evaluated = data.test.has_value();
  if (evaluated) {
    config.eval.recall_ks = resolve_recall_ks(config.eval, data.test->size());
    config.eval.ks_explicit = true;
    hook.dataset = &*data.test;
    hook.pair_seed = config.eval.pair_seed;
    hook.recall_ks = config.eval.recall_ks;
  }

  TrainResult result =
      train(config.train, data.train, evaluated ? &hook : nullptr);

  ensure_directory(out_dir);
  write_epochs_csv(result.history, out_dir + "/epochs.csv");
  write_histograms_csv(result.history, out_dir + "/histograms.csv");
  save_model(result.model, out_dir + "/model.txt");
  if (evaluated && !result.metric_trace.empty()) {
    write_metrics_file(result.metric_trace.back().second, out_dir + "/metrics.txt");
    if (result.metric_trace.size() > 1)
      write_metrics_trace_csv(result.metric_trace, config.eval.recall_ks,
                              out_dir + "/metrics_trace.csv");
  }
  write_text_file(out_dir + "/config.json", resolved_run_config_json(config));
  return {std::move(result), evaluated};
}

int cmd_train(const std::string& config_path, const std::string& out_dir_override) {
  RunConfig config = parse_run_config(config_path);
  const std::string out_dir =
      out_dir_override.empty() ? config.output_dir : out_dir_override;
  config.output_dir = out_dir;
  const RunOutcome outcome = execute_run(config, out_dir);
  std::cout << "run written to " << out_dir << " ("
            << outcome.result.history.size() << " epochs, final margin "
            << format_g(outcome.result.final_margin) << ")\n";
  return kExitOk;
}

int cmd_gen_data(std::size_t classes, std::size_t per_class, std::size_t dim,
                 double center_scale, double spread, std::uint64_t seed,
                 const std::string& out_path) {
  SyntheticSpec spec;
  spec.num_classes = classes;
  spec.samples_per_class = per_class;
  spec.feature_dim = dim;
  spec.center_scale = center_scale;
  spec.spread = spread;
  const LabeledDataset ds = generate_synthetic(spec, seed);
  save_csv(ds, out_path);
  std::cout << "wrote " << ds.size() << " samples, " << classes << " classes, dim "
            << dim << " to " << out_path << "\n";
  return kExitOk;
}

int cmd_eval(const std::string& model_path, const std::string& data_path,
             std::uint64_t pair_seed, std::vector<std::size_t> ks,
             const std::string& out_path) {
  const EmbeddingModel model = load_model(model_path);
  const LabeledDataset ds = remove_singletons(load_csv(data_path));
  if (model.input_dim() != ds.feature_dim())
    throw ConfigError("eval: model expects input dim " +
                      std::to_string(model.input_dim()) + ", dataset has dim " +
                      std::to_string(ds.feature_dim()));

  const bool explicit_ks = !ks.empty();
  if (!explicit_ks)
    for (std::size_t k : {1, 2, 4, 8})
      if (k + 1 <= ds.size()) ks.push_back(k);

  const Matrix embeddings = forward(model, ds.features);
  const MetricReport report = evaluate(embeddings, ds, pair_seed, ks);
  const std::string text = metric_report_to_string(report);
  if (out_path.empty())
    std::cout << text;
  else
    write_text_file(out_path, text);
  return kExitOk;
}

std::string error_status(const Error& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return "config-error";
  if (dynamic_cast<const ParseError*>(&e)) return "parse-error";
  if (dynamic_cast<const IoError*>(&e)) return "io-error";
  if (dynamic_cast<const DivergenceError*>(&e)) return "divergence-error";
  if (dynamic_cast<const NumericError*>(&e)) return "numeric-error";
  if (dynamic_cast<const ShapeError*>(&e)) return "shape-error";
  if (dynamic_cast<const ValueError*>(&e)) return "value-error";
  return "error";
}

int cmd_sweep(const std::string& config_path) {
  const SweepConfig sweep = parse_sweep_config(config_path);
  if (!sweep.base.data.uses_split() && sweep.base.data.test_dataset.empty())
    throw ConfigError("sweep: a test set is required (use 'data.dataset' or "
                      "'data.test_dataset')");

  ensure_directory(sweep.base.output_dir);
  std::ostringstream summary;
  summary << "mu0,t,step,rep,auc,recall@1,recall@2,recall@4,recall@8,final_margin,"
             "status\n";

  const std::vector<std::size_t> summary_ks = {1, 2, 4, 8};
  std::size_t cell = 0;
  std::size_t failures = 0;
  for (double mu0 : sweep.mu0_values)
    for (double threshold : sweep.threshold_values)
      for (double step : sweep.step_values) {
        for (std::size_t rep = 0; rep < sweep.repetitions; ++rep) {
          RunConfig config = sweep.base;
          config.train.scheduler.kind = SchedulerKind::Dams;
          config.train.scheduler.mu0 = mu0;
          config.train.scheduler.threshold = threshold;
          config.train.scheduler.dams_step = step;
          config.train.seed = mix_seed(mix_seed(sweep.base.train.seed, cell), rep);

          char dir_name[64];
          std::snprintf(dir_name, sizeof(dir_name), "run_%03zu_rep_%zu", cell, rep);
          const std::string run_dir = sweep.base.output_dir + "/" + dir_name;
          config.output_dir = run_dir;

          summary << format_g(mu0) << ',' << format_g(threshold) << ','
                  << format_g(step) << ',' << rep;
          try {
            const RunOutcome outcome = execute_run(config, run_dir);
            const MetricReport* report = nullptr;
            if (outcome.evaluated && !outcome.result.metric_trace.empty())
              report = &outcome.result.metric_trace.back().second;
            char buf[64];
            if (report) {
              std::snprintf(buf, sizeof(buf), "%.6f", report->auc);
              summary << ',' << buf;
            } else {
              summary << ",nan";
            }
            for (std::size_t k : summary_ks) {
              if (report && report->recall_at.count(k)) {
                std::snprintf(buf, sizeof(buf), "%.6f", report->recall_at.at(k));
                summary << ',' << buf;
              } else {
                summary << ",nan";
              }
            }
            summary << ',' << format_g(outcome.result.final_margin) << ",ok\n";
            std::cout << dir_name << ": ok\n";
          } catch (const Error& e) {
            ++failures;
            summary << ",nan,nan,nan,nan,nan,nan," << error_status(e) << "\n";
            std::cout << dir_name << ": failed (" << e.what() << ")\n";
          }
        }
        ++cell;
      }

  write_text_file(sweep.base.output_dir + "/summary.csv", summary.str());
  std::cout << "sweep summary written to " << sweep.base.output_dir
            << "/summary.csv (" << cell << " configurations x "
            << sweep.repetitions << " repetitions, " << failures << " failed)\n";
  return kExitOk;
}

int cmd_report(const std::string& run_dir) {
  const CsvTable epochs = read_csv_table(run_dir + "/epochs.csv");
  const std::size_t epoch_col = epochs.column("epoch");

  auto emit_curve = [&](const std::string& column, const std::string& filename) {
    const std::size_t col = epochs.column(column);
    std::ostringstream out;
    out << "epoch,value\n";
    for (const auto& row : epochs.rows)
      out << row[epoch_col] << ',' << row[col] << "\n";
    write_text_file(run_dir + "/" + filename, out.str());
  };

  emit_curve("margin", "margin_curve.csv");
  emit_curve("easy_proportion", "easy_proportion_curve.csv");
  emit_curve("median_effective_margin", "median_margin_curve.csv");
  std::cout << "curves written to " << run_dir << " (" << epochs.rows.size()
            << " epochs)\n";
  return kExitOk;
}

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"deep metric learning trainer with margin scheduling"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic labeled dataset");
  std::size_t classes = 0, per_class = 0, dim = 0;
  double center_scale = 1.0, spread = 0.1;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--classes", classes, "number of classes")->required();
  gen->add_option("--per-class", per_class, "samples per class (>= 2)")->required();
  gen->add_option("--dim", dim, "feature dimension")->required();
  gen->add_option("--center-scale", center_scale,
                  "class centers drawn uniformly in [-s, s]^dim (default 1)");
  gen->add_option("--spread", spread, "within-class standard deviation (default 0.1)");
  gen->add_option("--seed", gen_seed, "generator seed (default 0)");
  gen->add_option("--out", gen_out, "output csv path")->required();

  // train
  auto* tr = app.add_subcommand("train", "run one training configuration");
  std::string train_config, out_dir_override;
  tr->add_option("config", train_config, "run config json")->required();
  tr->add_option("--out-dir", out_dir_override, "override the config's output_dir");

  // sweep
  auto* sw = app.add_subcommand("sweep", "run a DAMS hyperparameter grid");
  std::string sweep_config;
  sw->add_option("config", sweep_config, "sweep config json")->required();

  // eval
  auto* ev = app.add_subcommand("eval", "evaluate a saved model on a dataset");
  std::string eval_model, eval_data, eval_out;
  std::uint64_t pair_seed = 0;
  std::vector<std::size_t> eval_ks;
  ev->add_option("--model", eval_model, "model file")->required();
  ev->add_option("--data", eval_data, "dataset csv")->required();
  ev->add_option("--pair-seed", pair_seed, "pair generation seed (default 0)");
  ev->add_option("--k", eval_ks, "recall cutoff (repeatable; default 1,2,4,8)");
  ev->add_option("--out", eval_out, "write the report here instead of stdout");

  // report
  auto* rp = app.add_subcommand("report", "extract plot-ready curves from a run");
  std::string report_dir;
  rp->add_option("run_dir", report_dir, "run directory containing epochs.csv")
      ->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help or the usage error
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (gen->parsed())
    return cmd_gen_data(classes, per_class, dim, center_scale, spread, gen_seed,
                        gen_out);
  if (tr->parsed()) return cmd_train(train_config, out_dir_override);
  if (sw->parsed()) return cmd_sweep(sweep_config);
  if (ev->parsed()) return cmd_eval(eval_model, eval_data, pair_seed, eval_ks, eval_out);
  if (rp->parsed()) return cmd_report(report_dir);
  return kExitUsage;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  try {
    return dispatch(args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ValueError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ShapeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace dml::cli
