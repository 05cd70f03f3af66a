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

#include "trafficseq/eval.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numeric>
#include <thread>

#include "trafficseq/correlation.hpp"
#include "trafficseq/error.hpp"
#include "trafficseq/io.hpp"
#include "trafficseq/neuralseq/train.hpp"

namespace trafficseq::eval {

using neuralseq::ModelKind;

double mape(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size()) {
    throw Error("eval", "MAPE needs equal lengths (" + std::to_string(actual.size()) + " vs " +
                            std::to_string(predicted.size()) + ")");
  }
  if (actual.empty()) throw Error("eval", "MAPE of an empty vector");
  double sum = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] == 0.0) {
      throw Error("eval", "MAPE undefined: actual value at index " + std::to_string(i) + " is 0");
    }
    sum += std::abs((predicted[i] - actual[i]) / actual[i]);
  }
  return sum / static_cast<double>(actual.size()) * 100.0;
}

double improvement_pct(double raw_mape, double adjusted_mape) {
  if (!(raw_mape > 0.0)) throw Error("eval", "improvement needs a positive raw MAPE");
  return (raw_mape - adjusted_mape) / raw_mape * 100.0;
}

FoldPlan rolling_splits(std::size_t n_samples, std::size_t k) {
  if (k < 1) throw Error("eval", "fold count must be >= 1");
  const std::size_t test_size = n_samples / (k + 1);
  if (test_size == 0) {
    throw Error("eval", std::to_string(n_samples) + " samples cannot fill " +
                            std::to_string(k + 1) + " blocks");
  }
  FoldPlan plan{{}, n_samples, k, test_size};
  for (std::size_t i = 1; i <= k; ++i) {
    const std::size_t test_begin = n_samples - (k - i + 1) * test_size;
    plan.folds.push_back(Fold{{0, test_begin}, {test_begin, test_begin + test_size}});
  }
  return plan;
}

std::uint64_t detection_seed(std::uint64_t master) { return master + 1; }

std::uint64_t model_seed(std::uint64_t master, ModelKind kind) {
  return master + 101 + static_cast<std::uint64_t>(kind);
}

double EvalReport::cv_mean_mape() const {
  if (fold_mapes.empty()) return 0.0;
  return std::accumulate(fold_mapes.begin(), fold_mapes.end(), 0.0) /
         static_cast<double>(fold_mapes.size());
}

PreparedData prepare(const TimeSeries& series, const ExperimentOptions& options) {
  if (series.has_missing()) throw Error("eval", "series still has missing values");
  auto [train, holdout] = train_holdout_split(series, options.train_days, options.holdout_days);
  std::size_t w = 0;
  if (options.window) {
    w = *options.window;
  } else {
    const auto corr = correlogram(train.values(), options.max_lag);
    w = std::min(suggest_window(corr), options.max_window);
  }
  if (w == 0) throw Error("eval", "window must be positive");
  return PreparedData{std::move(train), std::move(holdout), w};
}

std::vector<double> training_values(const PreparedData& data, bool adjust,
                                    const ExperimentOptions& options, std::size_t* flagged) {
  std::vector<double> values = data.train.values();
  if (flagged != nullptr) *flagged = 0;
  if (!adjust) return values;
  IsolationForestParams forest = options.forest;
  forest.seed = detection_seed(options.seed);
  const OutlierMask mask = detect_outliers(values, options.detection, options.sigma_k, forest);
  if (flagged != nullptr) *flagged = mask.count();
  return backward_fill_outliers(values, mask);
}

EvalReport evaluate_model(const PreparedData& data, ModelKind kind, bool adjust,
                          const ExperimentOptions& options) {
  EvalReport report;
  report.kind = kind;
  report.detection = options.detection;
  report.adjusted = adjust;
  report.seed = options.seed;

  neuralseq::ModelConfig config;
  config.kind = kind;
  config.window_w = data.window;
  config.hidden_size = options.hidden_size;
  config.epochs = options.epochs;
  config.batch_size = options.batch_size;
  config.learning_rate = options.learning_rate;
  config.grad_clip = options.grad_clip;
  config.seed = model_seed(options.seed, kind);
  config.validate();
  report.config = config;

  const std::vector<double> train_vals =
      training_values(data, adjust, options, &report.outliers_adjusted);
  const Scaler scaler = Scaler::fit(train_vals);
  const WindowedDataset dataset = make_scaled_windows(train_vals, data.window, scaler);
  const std::size_t w = data.window;

  const FoldPlan plan = rolling_splits(dataset.n_samples(), options.folds);
  for (const Fold& fold : plan.folds) {
    const auto model =
        neuralseq::train(dataset.subset(fold.train.begin, fold.train.end), config);
    // Predict the test rows from their scaled windows; actuals in Gbps.
    std::vector<double> actual, predicted;
    actual.reserve(fold.test.size());
    predicted.reserve(fold.test.size());
    for (std::size_t i = fold.test.begin; i < fold.test.end; ++i) {
      predicted.push_back(scaler.invert(neuralseq::predict_scaled(model, dataset.row(i))));
      actual.push_back(train_vals[i + w]);
    }
    report.fold_mapes.push_back(mape(actual, predicted));
  }

  const auto final_model = neuralseq::train(dataset, config);
  const std::vector<double> holdout_vals = data.holdout.values();
  report.trace_predicted = neuralseq::predict_series(final_model, holdout_vals);
  report.trace_actual.assign(holdout_vals.begin() + static_cast<std::ptrdiff_t>(w),
                             holdout_vals.end());
  const auto ts = data.holdout.timestamps();
  report.trace_timestamps.assign(ts.begin() + static_cast<std::ptrdiff_t>(w), ts.end());
  report.holdout_mape = mape(report.trace_actual, report.trace_predicted);
  return report;
}

namespace {

struct Task {
  ModelKind kind;
  bool adjust;
};

std::vector<EvalReport> run_tasks(const PreparedData& data, const std::vector<Task>& tasks,
                                  const ExperimentOptions& options) {
  std::vector<EvalReport> out(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        out[i] = evaluate_model(data, tasks[i].kind, tasks[i].adjust, options);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto jobs = static_cast<std::size_t>(std::max(1, options.jobs));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < std::min(jobs, tasks.size()); ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace

std::vector<EvalReport> run_experiment(const TimeSeries& series, std::span<const ModelKind> kinds,
                                       bool adjust, const ExperimentOptions& options) {
  if (kinds.empty()) throw Error("eval", "no model kinds requested");
  const PreparedData data = prepare(series, options);
  std::vector<Task> tasks;
  for (ModelKind k : kinds) tasks.push_back({k, adjust});
  return run_tasks(data, tasks, options);
}

std::vector<EvalReport> run_comparison(const TimeSeries& series, std::span<const ModelKind> kinds,
                                       const ExperimentOptions& options) {
  if (kinds.empty()) throw Error("eval", "no model kinds requested");
  const PreparedData data = prepare(series, options);
  std::vector<Task> tasks;
  for (ModelKind k : kinds) {
    tasks.push_back({k, false});
    tasks.push_back({k, true});
  }
  std::vector<EvalReport> out = run_tasks(data, tasks, options);
  for (std::size_t i = 0; i + 1 < out.size(); i += 2) {
    out[i + 1].improvement_pct = improvement_pct(out[i].holdout_mape, out[i + 1].holdout_mape);
  }
  return out;
}

RenderedReport render_report(std::span<const EvalReport> reports) {
  if (reports.empty()) throw Error("eval", "nothing to report");
  const std::size_t k = reports.front().fold_mapes.size();
  for (const EvalReport& r : reports) {
    if (r.fold_mapes.size() != k) throw Error("eval", "reports disagree on the fold count");
  }

  RenderedReport out;
  out.csv = "model,detection,adjusted";
  for (std::size_t i = 1; i <= k; ++i) out.csv += ",fold" + std::to_string(i);
  out.csv += ",holdout_mape,improvement_pct,seed\n";
  for (const EvalReport& r : reports) {
    out.csv += std::string(neuralseq::to_string(r.kind)) + ',' + std::string(to_string(r.detection)) +
               ',' + (r.adjusted ? "true" : "false");
    for (double m : r.fold_mapes) out.csv += ',' + io::fmt_fixed(m);
    out.csv += ',' + io::fmt_fixed(r.holdout_mape) + ',';
    if (r.improvement_pct) out.csv += io::fmt_fixed(*r.improvement_pct);
    out.csv += ',' + std::to_string(r.seed) + '\n';
  }

  // One row per kind, in order of first appearance.
  struct Row {
    ModelKind kind;
    const EvalReport* raw = nullptr;
    const EvalReport* adjusted = nullptr;
  };
  std::vector<Row> rows;
  for (const EvalReport& r : reports) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const Row& row) { return row.kind == r.kind; });
    if (it == rows.end()) {
      rows.push_back(Row{r.kind});
      it = rows.end() - 1;
    }
    (r.adjusted ? it->adjusted : it->raw) = &r;
  }

  auto pct = [](const EvalReport* r, bool cv) {
    return r == nullptr ? std::string("-") : io::fmt_fixed(cv ? r->cv_mean_mape() : r->holdout_mape, 2) + "%";
  };
  char line[256];
  std::snprintf(line, sizeof line, "%-16s %20s %23s %12s %14s %14s\n", "Model",
                "MAPE (with outlier)", "MAPE (without outlier)", "Improvement", "CV (with)",
                "CV (without)");
  out.text += line;
  out.text += std::string(104, '-') + '\n';
  for (const Row& row : rows) {
    std::string improvement = "-";
    if (row.raw != nullptr && row.adjusted != nullptr && row.raw->holdout_mape > 0.0) {
      improvement =
          io::fmt_fixed(improvement_pct(row.raw->holdout_mape, row.adjusted->holdout_mape), 2) + "%";
    }
    std::snprintf(line, sizeof line, "%-16s %20s %23s %12s %14s %14s\n",
                  std::string(neuralseq::display_name(row.kind)).c_str(),
                  pct(row.raw, false).c_str(), pct(row.adjusted, false).c_str(),
                  improvement.c_str(), pct(row.raw, true).c_str(), pct(row.adjusted, true).c_str());
    out.text += line;
  }
  return out;
}

std::vector<EvalReport> parse_report_csv(std::string_view text) {
  auto split = [](std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
      const auto pos = s.find(sep, start);
      parts.push_back(s.substr(start, pos - start));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
    return parts;
  };
  auto number = [](std::string_view s, std::size_t line) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
      throw Error("parse", "report line " + std::to_string(line) + ": bad number '" +
                               std::string(s) + "'");
    }
    return v;
  };

  std::vector<EvalReport> out;
  std::size_t folds = 0;
  std::size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (line_no == 1) {
      if (f.size() < 7 || f[0] != "model" || f[1] != "detection" || f[2] != "adjusted" ||
          f[f.size() - 3] != "holdout_mape" || f[f.size() - 2] != "improvement_pct" ||
          f.back() != "seed") {
        throw Error("parse", "not a report CSV header");
      }
      folds = f.size() - 6;
      continue;
    }
    if (f.size() != folds + 6) {
      throw Error("parse", "report line " + std::to_string(line_no) + ": wrong field count");
    }
    EvalReport r;
    r.kind = neuralseq::parse_model_kind(f[0]);
    r.detection = parse_detection_method(f[1]);
    if (f[2] != "true" && f[2] != "false") {
      throw Error("parse", "report line " + std::to_string(line_no) + ": adjusted must be true/false");
    }
    r.adjusted = f[2] == "true";
    for (std::size_t i = 0; i < folds; ++i) r.fold_mapes.push_back(number(f[3 + i], line_no));
    r.holdout_mape = number(f[3 + folds], line_no);
    if (!f[4 + folds].empty()) r.improvement_pct = number(f[4 + folds], line_no);
    const auto seed_field = f[5 + folds];
    const auto [sp, sec] =
        std::from_chars(seed_field.data(), seed_field.data() + seed_field.size(), r.seed);
    if (sec != std::errc{} || sp != seed_field.data() + seed_field.size()) {
      throw Error("parse", "report line " + std::to_string(line_no) + ": bad seed");
    }
    out.push_back(std::move(r));
  }
  if (out.empty()) throw Error("parse", "report CSV has no rows");
  return out;
}

std::string trace_csv(const EvalReport& report) {
  std::string out = "timestamp,actual_gbps,predicted_gbps\n";
  for (std::size_t i = 0; i < report.trace_predicted.size(); ++i) {
    out += std::to_string(report.trace_timestamps[i]) + ',' + io::fmt_exact(report.trace_actual[i]) +
           ',' + io::fmt_exact(report.trace_predicted[i]) + '\n';
  }
  return out;
}

}  // namespace trafficseq::eval
