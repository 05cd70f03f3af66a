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

// Seeded ISP-like traffic: diurnal and weekly sinusoids, a linear trend and
// Gaussian noise, with labelled spike/dip anomalies and optional gaps.

#include <cstdint>
#include <vector>

#include "trafficseq/series.hpp"

namespace trafficseq {

struct SynthConfig {
  int days = 29;
  std::int64_t interval_s = kDefaultIntervalS;
  std::int64_t start_epoch = 1609459200;  // 2021-01-01T00:00:00Z, a UTC midnight
  double base_gbps = 10.0;
  double diurnal_amp = 1.2;
  double diurnal_phase = 0.0;  // radians
  double weekly_amp = 0.4;
  double trend_per_day = 0.01;
  double noise_sigma = 0.8;
  double anomaly_rate = 0.005;
  double anomaly_magnitude_sigma = 8.0;
  double missing_rate = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthResult {
  TimeSeries series;            // Gbps; missing points where gaps were injected
  std::vector<bool> anomalies;  // exactly the injected anomaly indices
  std::vector<double> clean;    // signal before anomalies and gaps
};

SynthResult generate(const SynthConfig& config);

}  // namespace trafficseq
