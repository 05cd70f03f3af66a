/*
 * Copyright 2026 The trafficseq Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// trafficseq command-line front end.
//
// Exit codes: 0 success, 1 domain error, 2 usage error. Every run writes a
// manifest (CLI11 config format) beside its outputs; passing it back through
// --config repeats the run.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "trafficseq/anomaly.hpp"
#include "trafficseq/correlation.hpp"
#include "trafficseq/error.hpp"
#include "trafficseq/eval.hpp"
#include "trafficseq/io.hpp"
#include "trafficseq/neuralseq/train.hpp"
#include "trafficseq/series.hpp"
#include "trafficseq/synthgen.hpp"
#include "trafficseq/version.hpp"

namespace {

using namespace trafficseq;
namespace fs = std::filesystem;

struct InputFlags {
  std::string path;
  std::string timestamp_field = "timestamp";
  std::string value_field = "bps";
  std::int64_t interval_s = kDefaultIntervalS;
  bool keep_partial_day = false;

  void add(CLI::App* app, bool required = true) {
    auto* opt = app->add_option("-i,--input", path, "Telemetry JSON or series CSV");
    if (required) opt->required();
    app->add_option("--timestamp-field", timestamp_field, "Timestamp field name")
        ->capture_default_str();
    app->add_option("--value-field", value_field, "Value field name (bits per second)")
        ->capture_default_str();
    app->add_option("--interval", interval_s, "Sampling interval in seconds")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app->add_flag("--keep-partial-day", keep_partial_day, "Keep an incomplete trailing day");
  }

  TimeSeries load() const {
    io::LoadOptions o;
    o.fields.timestamp = timestamp_field;
    o.fields.value = value_field;
    o.fields.interval_s = interval_s;
    o.drop_partial_day = !keep_partial_day;
    return io::load_series(path, o);
  }
};

struct DetectFlags {
  std::string detector = "three-sigma";
  double sigma_k = 3.0;
  int trees = 100;
  int subsample = 256;
  double threshold = 0.6;

  void add(CLI::App* app) {
    app->add_option("--detector", detector, "three-sigma or iforest")
        ->capture_default_str()
        ->check(CLI::IsMember({"three-sigma", "three_sigma", "iforest", "isolation_forest"}));
    app->add_option("--sigma-k", sigma_k, "Three-sigma multiplier")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app->add_option("--trees", trees, "Isolation forest size")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app->add_option("--subsample", subsample, "Isolation forest subsample size")
        ->capture_default_str()
        ->check(CLI::Range(2, 1 << 24));
    app->add_option("--threshold", threshold, "Isolation forest score threshold in (0, 1)")
        ->capture_default_str();
  }

  IsolationForestParams forest(std::uint64_t seed) const {
    return IsolationForestParams{trees, subsample, threshold, seed};
  }
};

struct ModelFlags {
  std::optional<std::size_t> window;
  bool auto_window = false;
  std::size_t max_lag = 40;
  std::size_t max_window = 12;
  std::size_t hidden = 32;
  int epochs = 100;
  std::size_t batch = 16;
  double lr = 1e-3;
  double clip = 1.0;

  void add(CLI::App* app) {
    auto* w = app->add_option("--window", window, "Input window length");
    auto* a = app->add_flag("--auto-window", auto_window,
                            "Choose the window from the training PACF (default)");
    w->excludes(a);
    a->excludes(w);
    w->check(CLI::PositiveNumber);
    app->add_option("--max-lag", max_lag, "Largest PACF lag for the automatic window")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app->add_option("--max-window", max_window, "Cap on the automatic window")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app->add_option("--hidden", hidden, "Hidden units per recurrent layer")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app->add_option("--epochs", epochs, "Training epochs")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--batch", batch, "Mini-batch size")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--lr", lr, "Adam learning rate")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--clip", clip, "Global gradient-norm clip")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
  }
};

std::string with_suffix(const std::string& path, const std::string& suffix) { return path + suffix; }

// Manifest of the invoked subcommand, in the format --config reads. Unset
// options and false flags are omitted: both read back as their absence.
void write_manifest(const CLI::App& sub, const std::string& path, std::uint64_t seed) {
  std::ostringstream out;
  out << "# trafficseq " << version() << "\n# master seed " << seed << "\n[" << sub.get_name()
      << "]\n";
  std::istringstream lines(sub.config_to_str(true, false));
  for (std::string line; std::getline(lines, line);) {
    if (!line.ends_with("=\"\"") && !line.ends_with("=false")) out << line << '\n';
  }
  io::write_file_atomic(path, out.str());
}

std::vector<neuralseq::ModelKind> parse_models(const std::string& text) {
  if (text == "all") return {neuralseq::kAllModelKinds.begin(), neuralseq::kAllModelKinds.end()};
  std::vector<neuralseq::ModelKind> kinds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto k = neuralseq::parse_model_kind(item);
    if (std::find(kinds.begin(), kinds.end(), k) == kinds.end()) kinds.push_back(k);
  }
  if (kinds.empty()) throw Error("cli", "no models selected");
  return kinds;
}

std::string mask_csv(const TimeSeries& series, const OutlierMask& mask) {
  std::string out = "index,timestamp,flagged\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    out += std::to_string(i) + ',' + std::to_string(series[i].timestamp) + ',' +
           (mask[i] ? "1" : "0") + '\n';
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Traffic forecasting toolkit: ingest, analyze, clean and evaluate sequence models",
               "trafficseq"};
  app.set_config("--config", "", "Read flags from a manifest or config file");
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string out;

  // ingest
  InputFlags ingest_in;
  auto* ingest = app.add_subcommand("ingest", "Parse telemetry into a gap-free Gbps series CSV");
  ingest_in.add(ingest);
  ingest->add_option("-o,--out", out, "Output series CSV")->required();

  // analyze
  InputFlags analyze_in;
  std::size_t analyze_lag = 40;
  auto* analyze = app.add_subcommand("analyze", "Correlogram and suggested window");
  analyze_in.add(analyze);
  analyze->add_option("--max-lag", analyze_lag, "Largest lag")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  analyze->add_option("-o,--out", out, "Output CSV lag,acf,pacf,band")->required();

  // detect / clean
  InputFlags detect_in, clean_in;
  DetectFlags detect_flags, clean_flags;
  auto* detect = app.add_subcommand("detect", "Flag outliers");
  detect_in.add(detect);
  detect_flags.add(detect);
  detect->add_option("--seed", seed, "Master seed")->capture_default_str();
  detect->add_option("-o,--out", out, "Output CSV index,timestamp,value,score,flagged")->required();

  std::string mask_out;
  auto* clean = app.add_subcommand("clean", "Backward-fill detected outliers");
  clean_in.add(clean);
  clean_flags.add(clean);
  clean->add_option("--seed", seed, "Master seed")->capture_default_str();
  clean->add_option("-o,--out", out, "Output repaired series CSV")->required();
  clean->add_option("--mask-out", mask_out, "Mask CSV (default: <out>.mask.csv)");

  // train
  InputFlags train_in;
  ModelFlags train_model;
  DetectFlags train_detect;
  std::string train_kind = "lstm";
  bool train_adjust = false;
  auto* train = app.add_subcommand("train", "Train one model on a whole series and save it");
  train_in.add(train);
  train_model.add(train);
  train_detect.add(train);
  train->add_option("--model", train_kind, "rnn, lstm, gru, lstm-ed or lstm-ed-attn")
      ->capture_default_str();
  train->add_flag("--adjust", train_adjust, "Clean outliers before training");
  train->add_option("--seed", seed, "Master seed")->capture_default_str();
  train->add_option("-o,--out", out, "Output checkpoint")->required();

  // evaluate
  InputFlags eval_in;
  ModelFlags eval_model;
  DetectFlags eval_detect;
  std::string models = "all";
  std::size_t folds = 5;
  int train_days = 21, holdout_days = 8, jobs = 1;
  auto* evaluate =
      app.add_subcommand("evaluate", "Cross-validate and score every model, raw and adjusted");
  eval_in.add(evaluate);
  eval_model.add(evaluate);
  eval_detect.add(evaluate);
  evaluate->add_option("--models", models, "all or a comma list of model kinds")
      ->capture_default_str();
  evaluate->add_option("--folds", folds, "Rolling CV folds")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--train-days", train_days, "Days used for training")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--holdout-days", holdout_days, "Days held out for testing")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--seed", seed, "Master seed")->capture_default_str();
  evaluate->add_option("--jobs", jobs, "Parallel model runs")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  evaluate->add_option("-o,--out", out, "Output directory")->required();

  // datagen
  SynthConfig synth;
  std::string labels_out;
  auto* datagen = app.add_subcommand("datagen", "Generate labelled synthetic traffic");
  datagen->add_option("--days", synth.days, "Days")->capture_default_str()->check(CLI::PositiveNumber);
  datagen->add_option("--interval", synth.interval_s, "Sampling interval in seconds")
      ->capture_default_str();
  datagen->add_option("--start", synth.start_epoch, "First timestamp (epoch seconds)")
      ->capture_default_str();
  datagen->add_option("--base", synth.base_gbps, "Base level in Gbps")->capture_default_str();
  datagen->add_option("--diurnal", synth.diurnal_amp, "Daily amplitude")->capture_default_str();
  datagen->add_option("--diurnal-phase", synth.diurnal_phase, "Daily phase in radians")
      ->capture_default_str();
  datagen->add_option("--weekly", synth.weekly_amp, "Weekly amplitude")->capture_default_str();
  datagen->add_option("--trend", synth.trend_per_day, "Trend in Gbps per day")
      ->capture_default_str();
  datagen->add_option("--noise", synth.noise_sigma, "Noise standard deviation")
      ->capture_default_str();
  datagen->add_option("--anomaly-rate", synth.anomaly_rate, "Spike probability per point")
      ->capture_default_str();
  datagen->add_option("--magnitude", synth.anomaly_magnitude_sigma, "Spike size in noise sigmas")
      ->capture_default_str();
  datagen->add_option("--missing-rate", synth.missing_rate, "Gap probability per point")
      ->capture_default_str();
  datagen->add_option("--seed", seed, "Seed")->capture_default_str();
  datagen->add_option("-o,--out", out, "Output telemetry JSON")->required();
  datagen->add_option("--labels", labels_out, "Label CSV (default: <out>.labels.csv)");

  // report
  std::string report_in;
  auto* report = app.add_subcommand("report", "Render a report CSV as a comparison table");
  report->add_option("-i,--input", report_in, "report.csv from evaluate")->required();
  report->add_option("-o,--out", out, "Output text file (default: stdout)");

  for (CLI::App* sub : app.get_subcommands({})) sub->configurable();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n\n";
    const auto parsed = app.get_subcommands();
    std::cerr << (parsed.empty() ? app.help() : parsed.front()->help());
    return 2;
  }

  try {
    if (ingest->parsed()) {
      const TimeSeries s = ingest_in.load();
      io::write_file_atomic(out, io::series_to_csv(s));
      write_manifest(*ingest, with_suffix(out, ".manifest"), seed);
    } else if (analyze->parsed()) {
      const TimeSeries s = analyze_in.load();
      const auto corr = correlogram(s.values(), analyze_lag);
      std::string csv = "lag,acf,pacf,band\n";
      for (std::size_t k = 0; k <= analyze_lag; ++k) {
        csv += std::to_string(k) + ',' + io::fmt_fixed(corr.acf[k], 9) + ',' +
               io::fmt_fixed(corr.pacf[k], 9) + ',' + io::fmt_fixed(corr.band, 9) + '\n';
      }
      io::write_file_atomic(out, csv);
      write_manifest(*analyze, with_suffix(out, ".manifest"), seed);
      std::printf("suggested window %zu (band %.6f, n %zu)\n", suggest_window(corr), corr.band,
                  s.size());
    } else if (detect->parsed() || clean->parsed()) {
      const bool is_clean = clean->parsed();
      const InputFlags& in = is_clean ? clean_in : detect_in;
      const DetectFlags& f = is_clean ? clean_flags : detect_flags;
      const TimeSeries s = in.load();
      const auto values = s.values();
      std::vector<double> scores;
      const OutlierMask mask =
          detect_outliers(values, parse_detection_method(f.detector), f.sigma_k,
                          f.forest(eval::detection_seed(seed)), &scores);
      if (is_clean) {
        io::write_file_atomic(out, io::series_to_csv(backward_fill_outliers(s, mask)));
        io::write_file_atomic(mask_out.empty() ? with_suffix(out, ".mask.csv") : mask_out,
                              mask_csv(s, mask));
      } else {
        std::string csv = "index,timestamp,value,score,flagged\n";
        for (std::size_t i = 0; i < s.size(); ++i) {
          csv += std::to_string(i) + ',' + std::to_string(s[i].timestamp) + ',' +
                 io::fmt_exact(values[i]) + ',' + io::fmt_fixed(scores[i]) + ',' +
                 (mask[i] ? "1" : "0") + '\n';
        }
        io::write_file_atomic(out, csv);
      }
      write_manifest(is_clean ? *clean : *detect, with_suffix(out, ".manifest"), seed);
      std::printf("%zu of %zu points flagged\n", mask.count(), s.size());
    } else if (train->parsed()) {
      const TimeSeries s = train_in.load();
      std::vector<double> values = s.values();
      if (train_adjust) {
        const OutlierMask mask = detect_outliers(
            values, parse_detection_method(train_detect.detector), train_detect.sigma_k,
            train_detect.forest(eval::detection_seed(seed)));
        values = backward_fill_outliers(values, mask);
      }
      neuralseq::ModelConfig c;
      c.kind = neuralseq::parse_model_kind(train_kind);
      if (train_model.window) {
        c.window_w = *train_model.window;
      } else {
        const auto corr = correlogram(s.values(), std::min(train_model.max_lag, s.size() - 1));
        c.window_w = std::min(suggest_window(corr), train_model.max_window);
      }
      c.hidden_size = train_model.hidden;
      c.epochs = train_model.epochs;
      c.batch_size = train_model.batch;
      c.learning_rate = train_model.lr;
      c.grad_clip = train_model.clip;
      c.seed = eval::model_seed(seed, c.kind);
      const Scaler scaler = Scaler::fit(values);
      const auto model =
          neuralseq::train(make_scaled_windows(values, c.window_w, scaler), c,
                           [&](int epoch, double loss) {
                             if (epoch == 1 || epoch % 10 == 0 || epoch == c.epochs) {
                               std::fprintf(stderr, "epoch %d loss %.6e\n", epoch, loss);
                             }
                           });
      std::ostringstream buf;
      neuralseq::save_checkpoint(model, buf);
      io::write_file_atomic(out, buf.str());
      write_manifest(*train, with_suffix(out, ".manifest"), seed);
    } else if (evaluate->parsed()) {
      const TimeSeries s = eval_in.load();
      eval::ExperimentOptions o;
      o.detection = parse_detection_method(eval_detect.detector);
      o.sigma_k = eval_detect.sigma_k;
      o.forest = eval_detect.forest(eval::detection_seed(seed));
      o.folds = folds;
      o.train_days = train_days;
      o.holdout_days = holdout_days;
      o.window = eval_model.window;
      o.max_lag = eval_model.max_lag;
      o.max_window = eval_model.max_window;
      o.hidden_size = eval_model.hidden;
      o.epochs = eval_model.epochs;
      o.batch_size = eval_model.batch;
      o.learning_rate = eval_model.lr;
      o.grad_clip = eval_model.clip;
      o.seed = seed;
      o.jobs = jobs;
      const auto kinds = parse_models(models);
      const auto reports = eval::run_comparison(s, kinds, o);
      const auto rendered = eval::render_report(reports);
      const fs::path dir(out);
      io::write_file_atomic((dir / "report.csv").string(), rendered.csv);
      io::write_file_atomic((dir / "report.txt").string(), rendered.text);
      for (const auto& r : reports) {
        const std::string name = "trace_" + std::string(neuralseq::to_string(r.kind)) + '_' +
                                 (r.adjusted ? "adjusted" : "raw") + ".csv";
        io::write_file_atomic((dir / name).string(), eval::trace_csv(r));
      }
      write_manifest(*evaluate, (dir / "manifest").string(), seed);
      std::fputs(rendered.text.c_str(), stdout);
    } else if (datagen->parsed()) {
      synth.seed = seed;
      const SynthResult r = generate(synth);
      io::write_file_atomic(out, io::series_to_telemetry(r.series));
      std::string labels = "index,timestamp,anomaly\n";
      for (std::size_t i = 0; i < r.series.size(); ++i) {
        labels += std::to_string(i) + ',' + std::to_string(r.series[i].timestamp) + ',' +
                  (r.anomalies[i] ? "1" : "0") + '\n';
      }
      io::write_file_atomic(labels_out.empty() ? with_suffix(out, ".labels.csv") : labels_out,
                            labels);
      write_manifest(*datagen, with_suffix(out, ".manifest"), seed);
    } else if (report->parsed()) {
      const auto reports = eval::parse_report_csv(io::read_file(report_in));
      const auto text = eval::render_report(reports).text;
      if (out.empty()) {
        std::fputs(text.c_str(), stdout);
      } else {
        io::write_file_atomic(out, text);
        write_manifest(*report, with_suffix(out, ".manifest"), seed);
      }
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error [internal]: %s\n", e.what());
    return 1;
  }
  return 0;
}
