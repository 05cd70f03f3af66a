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

#include "trafficseq/neuralseq/train.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "trafficseq/error.hpp"
#include "trafficseq/neuralseq/model.hpp"

namespace trafficseq::neuralseq {
namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

}  // namespace

TrainedModel train(const WindowedDataset& dataset, const ModelConfig& config,
                   const EpochCallback& on_epoch) {
  config.validate();
  if (!dataset.scaler) throw Error("neuralseq", "training data must be scaled");
  if (dataset.window_w != config.window_w) {
    throw Error("neuralseq", "dataset window " + std::to_string(dataset.window_w) +
                                 " does not match model window " +
                                 std::to_string(config.window_w));
  }
  const std::size_t n = dataset.n_samples();
  if (n < config.batch_size) {
    throw Error("neuralseq", "dataset has " + std::to_string(n) +
                                 " samples, fewer than one batch of " +
                                 std::to_string(config.batch_size));
  }

  SequenceModel model(config);
  TrainedModel result{config, init_params(config), {}, *dataset.scaler};
  CellParams& params = result.params;
  CellParams grad = zeros(model.layout());
  std::vector<double> m(params.values.size(), 0.0);
  std::vector<double> v(params.values.size(), 0.0);
  double beta1_pow = 1.0, beta2_pow = 1.0;
  const std::size_t w = config.window_w;

  result.train_loss_history.reserve(static_cast<std::size_t>(config.epochs));
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t end = std::min(n, start + config.batch_size);
      const double inv_b = 1.0 / static_cast<double>(end - start);
      std::fill(grad.values.begin(), grad.values.end(), 0.0);
      for (std::size_t i = start; i < end; ++i) {
        const auto x = std::span<const double>(dataset.features).subspan(i * w, w);
        const double err = model.forward(params, x) - dataset.targets[i];
        epoch_loss += err * err;
        model.backward(params, x, 2.0 * err * inv_b, grad);
      }

      double norm2 = 0.0;
      for (double g : grad.values) norm2 += g * g;
      if (!std::isfinite(norm2)) {
        throw Error("neuralseq", "training diverged (non-finite gradient) in epoch " +
                                     std::to_string(epoch + 1));
      }
      const double norm = std::sqrt(norm2);
      const double clip = norm > config.grad_clip ? config.grad_clip / norm : 1.0;

      beta1_pow *= kBeta1;
      beta2_pow *= kBeta2;
      const double lr_t = config.learning_rate;
      for (std::size_t j = 0; j < params.values.size(); ++j) {
        const double g = grad.values[j] * clip;
        m[j] = kBeta1 * m[j] + (1.0 - kBeta1) * g;
        v[j] = kBeta2 * v[j] + (1.0 - kBeta2) * g * g;
        const double m_hat = m[j] / (1.0 - beta1_pow);
        const double v_hat = v[j] / (1.0 - beta2_pow);
        params.values[j] -= lr_t * m_hat / (std::sqrt(v_hat) + kAdamEps);
      }
    }
    epoch_loss /= static_cast<double>(n);
    if (!std::isfinite(epoch_loss) || !params.all_finite()) {
      throw Error("neuralseq", "training diverged (non-finite loss) in epoch " +
                                   std::to_string(epoch + 1));
    }
    result.train_loss_history.push_back(epoch_loss);
    if (on_epoch) on_epoch(epoch + 1, epoch_loss);
  }
  return result;
}

double predict_scaled(const TrainedModel& model, std::span<const double> x) {
  SequenceModel engine(model.config);
  return engine.forward(model.params, x);
}

std::vector<double> predict_series(const TrainedModel& model, std::span<const double> values) {
  const std::size_t w = model.config.window_w;
  if (values.size() <= w) {
    throw Error("neuralseq", "series of length " + std::to_string(values.size()) +
                                 " is too short for window " + std::to_string(w));
  }
  const std::vector<double> scaled = model.scaler.apply(values);
  SequenceModel engine(model.config);
  std::vector<double> out(values.size() - w);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double y = engine.forward(model.params, std::span<const double>(scaled).subspan(i, w));
    out[i] = model.scaler.invert(y);
  }
  return out;
}

std::vector<double> predict_series(const TrainedModel& model, const TimeSeries& series) {
  return predict_series(model, series.values());
}

double gradient_check(const ModelConfig& config, int trials, double epsilon, std::uint64_t seed,
                      Stencil stencil) {
  config.validate();
  if (config.hidden_size > 4 || config.window_w > 4) {
    throw Error("neuralseq", "gradient check is limited to hidden_size <= 4 and window <= 4");
  }
  SequenceModel model(config);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> weight(-1.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    CellParams params = zeros(model.layout());
    for (double& p : params.values) p = weight(rng);
    std::vector<double> x(config.window_w);
    for (double& xi : x) xi = unit(rng);
    const double target = unit(rng);

    auto loss = [&](const CellParams& p) {
      const double e = model.forward(p, x) - target;
      return e * e;
    };
    CellParams analytic = zeros(model.layout());
    const double err = model.forward(params, x) - target;
    model.backward(params, x, 2.0 * err, analytic);

    for (std::size_t j = 0; j < params.values.size(); ++j) {
      const double saved = params.values[j];
      auto at = [&](double delta) {
        params.values[j] = saved + delta;
        const double l = loss(params);
        params.values[j] = saved;
        return l;
      };
      const double d1 = at(epsilon) - at(-epsilon);
      const double numeric = stencil == Stencil::central2
                                 ? d1 / (2.0 * epsilon)
                                 : (8.0 * d1 - (at(2.0 * epsilon) - at(-2.0 * epsilon))) /
                                       (12.0 * epsilon);
      const double a = analytic.values[j];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace trafficseq::neuralseq
