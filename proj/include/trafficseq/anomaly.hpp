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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "trafficseq/series.hpp"

namespace trafficseq {

enum class DetectionMethod { three_sigma, isolation_forest };

std::string_view to_string(DetectionMethod method) noexcept;
// Accepts "three-sigma"/"three_sigma" and "iforest"/"isolation_forest".
DetectionMethod parse_detection_method(std::string_view text);

struct ThreeSigmaParams {
  double k = 3.0;
  // Statistics of the vector the mask was computed on.
  double mean = 0.0;
  double stddev = 0.0;
};

struct IsolationForestParams {
  int trees = 100;
  int subsample = 256;
  double threshold = 0.6;
  std::uint64_t seed = 0;
};

// Per-index anomaly flags and the detector configuration that produced them.
// Never flags every index.
class OutlierMask {
 public:
  using Params = std::variant<ThreeSigmaParams, IsolationForestParams>;

  OutlierMask(std::vector<bool> flags, DetectionMethod method, Params params);

  const std::vector<bool>& flags() const noexcept { return flags_; }
  std::size_t size() const noexcept { return flags_.size(); }
  bool operator[](std::size_t i) const { return flags_[i]; }
  std::size_t count() const noexcept;
  std::vector<std::size_t> indices() const;
  DetectionMethod method() const noexcept { return method_; }
  const Params& params() const noexcept { return params_; }

 private:
  std::vector<bool> flags_;
  DetectionMethod method_;
  Params params_;
};

// (x - mean) / stddev with the population standard deviation.
std::vector<double> z_scores(std::span<const double> values);

// Flags |x - mean| > k * stddev over the whole vector.
OutlierMask three_sigma_mask(std::span<const double> values, double k = 3.0);

// c(n): average unsuccessful-search path length of a binary search tree on n
// points. c(0) = c(1) = 0, c(2) = 1.
double average_path_c(std::size_t n);

// 2^(-mean_path / c(psi))
double anomaly_score(double mean_path, std::size_t psi);

// One isolation tree over scalar values. Leaves keep the number of training
// points that reached them.
class ITree {
 public:
  struct Node {
    double split = 0.0;
    std::int32_t left = -1;  // -1 on leaves
    std::int32_t right = -1;
    std::uint32_t size = 0;
    bool leaf() const noexcept { return left < 0; }
  };

  ITree(std::vector<double> sample, std::size_t height_limit, std::uint64_t rng_seed,
        std::uint64_t tree_index);

  // Depth of the leaf reached by x plus c(leaf size).
  double path_length(double x) const;
  std::size_t height() const;
  std::size_t height_limit() const noexcept { return height_limit_; }
  std::span<const Node> nodes() const noexcept { return nodes_; }

 private:
  std::vector<Node> nodes_;
  std::size_t height_limit_;
};

class IsolationForest {
 public:
  static IsolationForest build(std::span<const double> values, int trees = 100,
                               int subsample = 256, std::uint64_t seed = 0);

  double score(double x) const;
  std::vector<double> scores(std::span<const double> values) const;

  std::span<const ITree> trees() const noexcept { return trees_; }
  std::size_t subsample_size() const noexcept { return subsample_; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  IsolationForest(std::vector<ITree> trees, std::size_t subsample, std::uint64_t seed)
      : trees_(std::move(trees)), subsample_(subsample), seed_(seed) {}

  std::vector<ITree> trees_;
  std::size_t subsample_;
  std::uint64_t seed_;
};

IsolationForest build_isolation_forest(std::span<const double> values, int trees = 100,
                                       int subsample = 256, std::uint64_t seed = 0);

// s(x) = 2^(-E[h(x)] / c(psi))
std::vector<double> iforest_scores(const IsolationForest& model, std::span<const double> values);

OutlierMask iforest_mask(std::span<const double> scores, double threshold = 0.6);
OutlierMask iforest_mask(std::span<const double> scores, const IsolationForestParams& params);

// Runs the configured detector over `values`; `scores` receives |z| for
// three-sigma and the anomaly score for the forest.
OutlierMask detect_outliers(std::span<const double> values, DetectionMethod method,
                            double sigma_k, const IsolationForestParams& forest,
                            std::vector<double>* scores = nullptr);

// Each flagged value takes the next unflagged value; a flagged run at the end
// takes the last unflagged value before it.
std::vector<double> backward_fill_outliers(std::span<const double> values,
                                           const OutlierMask& mask);
TimeSeries backward_fill_outliers(const TimeSeries& series, const OutlierMask& mask);

}  // namespace trafficseq
