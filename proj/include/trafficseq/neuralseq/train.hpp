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

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "trafficseq/neuralseq/config.hpp"
#include "trafficseq/neuralseq/params.hpp"
#include "trafficseq/series.hpp"

namespace trafficseq::neuralseq {

struct TrainedModel {
  ModelConfig config;
  CellParams params;
  std::vector<double> train_loss_history;  // mean scaled MSE per epoch
  Scaler scaler;
};

// Called after every epoch with (epoch, loss). Optional.
using EpochCallback = std::function<void(int, double)>;

// Adam (beta1 0.9, beta2 0.999, eps 1e-8) on mini-batches taken in temporal
// order, with global-norm gradient clipping. The dataset must be scaled.
TrainedModel train(const WindowedDataset& dataset, const ModelConfig& config,
                   const EpochCallback& on_epoch = {});

// Scalar prediction for one scaled input window.
double predict_scaled(const TrainedModel& model, std::span<const double> x);

// One prediction (in original units) per window of `values`; element i
// predicts values[i + w].
std::vector<double> predict_series(const TrainedModel& model, std::span<const double> values);
std::vector<double> predict_series(const TrainedModel& model, const TimeSeries& series);

enum class Stencil {
  central2,  // (f(p + e) - f(p - e)) / 2e
  central4,  // (8 (f(p + e) - f(p - e)) - (f(p + 2e) - f(p - 2e))) / 12e
};

// Largest relative difference between analytic and central-difference
// gradients of the single-sample squared error, over every parameter and
// `trials` random (params, input, target) draws. The relative error
// denominator is max(|analytic|, |numeric|, 1e-8). The fourth-order stencil
// tolerates a larger step, which keeps rounding error small on entries whose
// gradient is near the 1e-8 floor.
double gradient_check(const ModelConfig& config, int trials, double epsilon = 1e-3,
                      std::uint64_t seed = 1, Stencil stencil = Stencil::central4);

void save_checkpoint(const TrainedModel& model, std::ostream& out);
TrainedModel load_checkpoint(std::istream& in);
void save_checkpoint(const TrainedModel& model, const std::string& path);
TrainedModel load_checkpoint(const std::string& path);

}  // namespace trafficseq::neuralseq
