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

#include "trafficseq/correlation.hpp"

#include <cmath>
#include <string>

#include "trafficseq/error.hpp"
#include "trafficseq/simd/kernels.hpp"

namespace trafficseq {

std::vector<double> acf(std::span<const double> series, std::size_t max_lag) {
  const std::size_t n = series.size();
  if (n <= max_lag) {
    throw Error("correlation", "series length " + std::to_string(n) + " must exceed max lag " +
                                   std::to_string(max_lag));
  }
  double mean = 0.0;
  for (double x : series) mean += x;
  mean /= static_cast<double>(n);

  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = series[i] - mean;

  const auto& k = simd::active();
  const double denom = k.dot(d.data(), d.data(), n);
  if (!(denom > 0.0)) throw Error("correlation", "series is constant (zero variance)");

  std::vector<double> r(max_lag + 1);
  r[0] = 1.0;
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    r[lag] = k.dot(d.data(), d.data() + lag, n - lag) / denom;
  }
  return r;
}

std::vector<double> pacf_from_acf(std::span<const double> r) {
  const std::size_t max_lag = r.empty() ? 0 : r.size() - 1;
  std::vector<double> out(max_lag + 1);
  out[0] = 1.0;
  if (max_lag == 0) return out;

  // phi holds the order-(k-1) AR coefficients, 1-based.
  std::vector<double> phi(max_lag + 1, 0.0);
  std::vector<double> prev(max_lag + 1, 0.0);
  for (std::size_t k = 1; k <= max_lag; ++k) {
    double num = r[k];
    double den = 1.0;
    for (std::size_t j = 1; j < k; ++j) {
      num -= prev[j] * r[k - j];
      den -= prev[j] * r[j];
    }
    if (std::abs(den) < 1e-12) {
      throw Error("correlation", "Durbin-Levinson recursion is singular at lag " +
                                     std::to_string(k));
    }
    const double phi_kk = num / den;
    for (std::size_t j = 1; j < k; ++j) phi[j] = prev[j] - phi_kk * prev[k - j];
    phi[k] = phi_kk;
    out[k] = phi_kk;
    prev = phi;
  }
  return out;
}

std::vector<double> pacf(std::span<const double> series, std::size_t max_lag) {
  return pacf_from_acf(acf(series, max_lag));
}

double significance_band(std::size_t n) {
  if (n == 0) throw Error("correlation", "significance band needs n > 0");
  return 1.96 / std::sqrt(static_cast<double>(n));
}

CorrelogramResult correlogram(std::span<const double> series, std::size_t max_lag) {
  CorrelogramResult res;
  res.acf = acf(series, max_lag);
  res.pacf = pacf_from_acf(res.acf);
  res.band = significance_band(series.size());
  return res;
}

std::size_t suggest_window(const CorrelogramResult& corr) {
  std::size_t k = 0;
  while (k + 1 < corr.pacf.size() && std::abs(corr.pacf[k + 1]) > corr.band) ++k;
  return k == 0 ? 1 : k;
}

}  // namespace trafficseq
