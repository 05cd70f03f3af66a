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

#pragma once

// Rolling-origin cross-validation, MAPE, and the raw-versus-adjusted
// experiment matrix.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trafficseq/anomaly.hpp"
#include "trafficseq/neuralseq/config.hpp"
#include "trafficseq/series.hpp"

namespace trafficseq::eval {

// (1/n) sum |(p_i - o_i) / o_i| * 100. Any zero actual is an error.
double mape(std::span<const double> actual, std::span<const double> predicted);

// (raw - adjusted) / raw * 100
double improvement_pct(double raw_mape, double adjusted_mape);

struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const noexcept { return end - begin; }
  bool operator==(const IndexRange&) const = default;
};

struct Fold {
  IndexRange train;
  IndexRange test;
  bool operator==(const Fold&) const = default;
};

struct FoldPlan {
  std::vector<Fold> folds;
  std::size_t n_samples = 0;
  std::size_t k = 0;
  std::size_t test_size = 0;
};

// n is cut into k+1 blocks of floor(n/(k+1)) from the end; the first train
// block absorbs the remainder. Fold i trains on everything before its test
// block.
FoldPlan rolling_splits(std::size_t n_samples, std::size_t k = 5);

struct ExperimentOptions {
  DetectionMethod detection = DetectionMethod::three_sigma;
  double sigma_k = 3.0;
  IsolationForestParams forest;
  std::size_t folds = 5;
  int train_days = 21;
  int holdout_days = 8;
  std::optional<std::size_t> window;  // unset: chosen from the training PACF
  std::size_t max_lag = 40;
  std::size_t max_window = 12;  // cap for the automatic choice
  std::size_t hidden_size = 32;
  int epochs = 100;
  std::size_t batch_size = 16;
  double learning_rate = 1e-3;
  double grad_clip = 1.0;
  std::uint64_t seed = 0;
  int jobs = 1;
};

// Seeds derived from the master seed by fixed offsets.
std::uint64_t detection_seed(std::uint64_t master);
std::uint64_t model_seed(std::uint64_t master, neuralseq::ModelKind kind);

struct EvalReport {
  neuralseq::ModelKind kind = neuralseq::ModelKind::rnn;
  DetectionMethod detection = DetectionMethod::three_sigma;
  bool adjusted = false;
  std::vector<double> fold_mapes;
  double holdout_mape = 0.0;
  std::optional<double> improvement_pct;  // adjusted rows, relative to raw
  neuralseq::ModelConfig config;
  std::uint64_t seed = 0;
  std::size_t outliers_adjusted = 0;

  // Holdout prediction trace.
  std::vector<std::int64_t> trace_timestamps;
  std::vector<double> trace_actual;
  std::vector<double> trace_predicted;

  double cv_mean_mape() const;
};

// Data shared by every model run of one experiment.
struct PreparedData {
  TimeSeries train;
  TimeSeries holdout;
  std::size_t window = 0;
};

PreparedData prepare(const TimeSeries& series, const ExperimentOptions& options);

// Training values for one variant: raw, or backward-filled over the outliers
// detected on the training portion alone.
std::vector<double> training_values(const PreparedData& data, bool adjust,
                                    const ExperimentOptions& options,
                                    std::size_t* flagged = nullptr);

EvalReport evaluate_model(const PreparedData& data, neuralseq::ModelKind kind, bool adjust,
                          const ExperimentOptions& options);

// One report per kind for the requested variant.
std::vector<EvalReport> run_experiment(const TimeSeries& series,
                                       std::span<const neuralseq::ModelKind> kinds, bool adjust,
                                       const ExperimentOptions& options);

// Raw and adjusted runs for every kind (raw first, then adjusted, per kind);
// adjusted rows carry improvement_pct.
std::vector<EvalReport> run_comparison(const TimeSeries& series,
                                       std::span<const neuralseq::ModelKind> kinds,
                                       const ExperimentOptions& options);

struct RenderedReport {
  std::string csv;   // model,detection,adjusted,fold1..foldk,holdout_mape,improvement_pct,seed
  std::string text;  // plain-text comparison table
};

RenderedReport render_report(std::span<const EvalReport> reports);

// Reads the machine-readable CSV back (traces and configs are not stored).
std::vector<EvalReport> parse_report_csv(std::string_view text);

// timestamp,actual_gbps,predicted_gbps
std::string trace_csv(const EvalReport& report);

}  // namespace trafficseq::eval
