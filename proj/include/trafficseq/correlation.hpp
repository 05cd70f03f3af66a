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

// Sample autocorrelation, partial autocorrelation (Durbin-Levinson) and the
// window-size rule derived from the correlogram.

#include <cstddef>
#include <span>
#include <vector>

namespace trafficseq {

struct CorrelogramResult {
  std::vector<double> acf;   // lags 0..max_lag, acf[0] == 1
  std::vector<double> pacf;  // lags 0..max_lag, pacf[0] == 1
  double band = 0.0;         // 95% significance half-width

  std::size_t max_lag() const noexcept { return acf.empty() ? 0 : acf.size() - 1; }
};

// r_k = sum_t (x_t - mean)(x_{t+k} - mean) / sum_t (x_t - mean)^2
std::vector<double> acf(std::span<const double> series, std::size_t max_lag);

std::vector<double> pacf(std::span<const double> series, std::size_t max_lag);

// Durbin-Levinson on an autocorrelation vector with r[0] == 1.
std::vector<double> pacf_from_acf(std::span<const double> r);

// 1.96 / sqrt(n)
double significance_band(std::size_t n);

CorrelogramResult correlogram(std::span<const double> series, std::size_t max_lag);

// Length of the initial run of lags whose |pacf| exceeds the band, at least 1.
std::size_t suggest_window(const CorrelogramResult& corr);

}  // namespace trafficseq
