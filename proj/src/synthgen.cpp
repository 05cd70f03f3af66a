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

#include "trafficseq/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "trafficseq/error.hpp"

namespace trafficseq {
namespace {

// Independent streams so changing one rate leaves the others untouched.
std::mt19937_64 stream(std::uint64_t seed, std::uint32_t which) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    which};
  return std::mt19937_64(seq);
}

}  // namespace

void SynthConfig::validate() const {
  if (days < 1) throw Error("synth", "days must be >= 1");
  if (interval_s <= 0 || kSecondsPerDay % interval_s != 0) {
    throw Error("synth", "interval must be a positive divisor of 86400 s");
  }
  if (start_epoch < 0) throw Error("synth", "start_epoch must be >= 0");
  if (!(noise_sigma >= 0.0)) throw Error("synth", "noise_sigma must be >= 0");
  if (!(anomaly_rate >= 0.0 && anomaly_rate <= 0.05)) {
    throw Error("synth", "anomaly_rate must lie in [0, 0.05]");
  }
  if (!(missing_rate >= 0.0 && missing_rate <= 0.05)) {
    throw Error("synth", "missing_rate must lie in [0, 0.05]");
  }
  if (!(anomaly_magnitude_sigma >= 0.0)) throw Error("synth", "anomaly magnitude must be >= 0");
}

SynthResult generate(const SynthConfig& config) {
  config.validate();
  const std::size_t per_day = static_cast<std::size_t>(kSecondsPerDay / config.interval_s);
  const std::size_t n = per_day * static_cast<std::size_t>(config.days);
  constexpr double two_pi = 2.0 * std::numbers::pi;

  auto noise_rng = stream(config.seed, 1);
  auto anomaly_rng = stream(config.seed, 2);
  auto missing_rng = stream(config.seed, 3);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<double> clean(n);
  std::vector<TimePoint> points(n);
  std::vector<bool> anomalies(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t ts = config.start_epoch + static_cast<std::int64_t>(i) * config.interval_s;
    const double elapsed_days =
        static_cast<double>(ts - config.start_epoch) / static_cast<double>(kSecondsPerDay);
    const double tod = static_cast<double>(ts % kSecondsPerDay);
    const double day_of_week = std::fmod(static_cast<double>(ts) / kSecondsPerDay, 7.0);

    double v = config.base_gbps +
               config.diurnal_amp * std::sin(two_pi * tod / kSecondsPerDay + config.diurnal_phase) +
               config.weekly_amp * std::sin(two_pi * day_of_week / 7.0) +
               config.trend_per_day * elapsed_days + config.noise_sigma * noise(noise_rng);
    v = std::max(v, 0.0);
    clean[i] = v;

    // Draw both values every step so the sequence of decisions is stable.
    const double u_anomaly = unit(anomaly_rng);
    const double u_sign = unit(anomaly_rng);
    if (u_anomaly < config.anomaly_rate) {
      const double sign = u_sign < 0.5 ? -1.0 : 1.0;
      v = std::max(v + sign * config.anomaly_magnitude_sigma * config.noise_sigma, 0.0);
      anomalies[i] = true;
    }
    points[i] = TimePoint{ts, v};
  }

  // Gaps never hit anomalies or the two ends, so the series stays fillable
  // and its extent survives a round trip through the telemetry format.
  for (std::size_t i = 0; i < n; ++i) {
    const double u = unit(missing_rng);
    if (i > 0 && i + 1 < n && !anomalies[i] && u < config.missing_rate) {
      points[i].value.reset();
    }
  }
  return SynthResult{TimeSeries(std::move(points), config.interval_s, Unit::gbps),
                     std::move(anomalies), std::move(clean)};
}

}  // namespace trafficseq
