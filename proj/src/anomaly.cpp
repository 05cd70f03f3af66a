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

#include "trafficseq/anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "trafficseq/error.hpp"

namespace trafficseq {
namespace {

constexpr double kEulerGamma = 0.5772156649;

void mean_stddev(std::span<const double> values, double& mean, double& stddev) {
  const double n = static_cast<double>(values.size());
  mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : values) ss += (x - mean) * (x - mean);
  stddev = std::sqrt(ss / n);
}

}  // namespace

std::string_view to_string(DetectionMethod method) noexcept {
  switch (method) {
    case DetectionMethod::three_sigma:
      return "three-sigma";
    case DetectionMethod::isolation_forest:
      return "iforest";
  }
  return "unknown";
}

DetectionMethod parse_detection_method(std::string_view text) {
  if (text == "three-sigma" || text == "three_sigma") return DetectionMethod::three_sigma;
  if (text == "iforest" || text == "isolation_forest" || text == "isolation-forest") {
    return DetectionMethod::isolation_forest;
  }
  throw Error("anomaly", "unknown detector '" + std::string(text) + "'");
}

OutlierMask::OutlierMask(std::vector<bool> flags, DetectionMethod method, Params params)
    : flags_(std::move(flags)), method_(method), params_(params) {
  if (!flags_.empty() && std::all_of(flags_.begin(), flags_.end(), [](bool f) { return f; })) {
    throw Error("anomaly", "mask flags every point; nothing left to fill from");
  }
}

std::size_t OutlierMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(flags_.begin(), flags_.end(), true));
}

std::vector<std::size_t> OutlierMask::indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < flags_.size(); ++i) {
    if (flags_[i]) out.push_back(i);
  }
  return out;
}

std::vector<double> z_scores(std::span<const double> values) {
  if (values.size() < 2) throw Error("anomaly", "three-sigma needs at least 2 values");
  double mean = 0.0, sd = 0.0;
  mean_stddev(values, mean, sd);
  if (!(sd > 0.0)) throw Error("anomaly", "three-sigma on a constant vector (sigma = 0)");
  std::vector<double> z(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) z[i] = (values[i] - mean) / sd;
  return z;
}

OutlierMask three_sigma_mask(std::span<const double> values, double k) {
  if (values.size() < 2) throw Error("anomaly", "three-sigma needs at least 2 values");
  if (!(k > 0.0)) throw Error("anomaly", "sigma multiplier must be positive");
  double mean = 0.0, sd = 0.0;
  mean_stddev(values, mean, sd);
  if (!(sd > 0.0)) throw Error("anomaly", "three-sigma on a constant vector (sigma = 0)");
  std::vector<bool> flags(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) flags[i] = std::abs(values[i] - mean) > k * sd;
  return OutlierMask(std::move(flags), DetectionMethod::three_sigma,
                     ThreeSigmaParams{k, mean, sd});
}

double average_path_c(std::size_t n) {
  if (n <= 1) return 0.0;
  if (n == 2) return 1.0;
  const double m = static_cast<double>(n - 1);
  return 2.0 * (std::log(m) + kEulerGamma) - 2.0 * m / static_cast<double>(n);
}

double anomaly_score(double mean_path, std::size_t psi) {
  return std::exp2(-mean_path / average_path_c(psi));
}

ITree::ITree(std::vector<double> sample, std::size_t height_limit, std::uint64_t rng_seed,
             std::uint64_t tree_index)
    : height_limit_(height_limit) {
  std::seed_seq seq{static_cast<std::uint32_t>(rng_seed), static_cast<std::uint32_t>(rng_seed >> 32),
                    static_cast<std::uint32_t>(tree_index),
                    static_cast<std::uint32_t>(tree_index >> 32)};
  std::mt19937_64 rng(seq);

  // Iterative growth over [begin, end) ranges of `sample`, partitioned in place.
  struct Pending {
    std::size_t node, begin, end, depth;
  };
  nodes_.push_back(Node{});
  std::vector<Pending> stack{{0, 0, sample.size(), 0}};
  while (!stack.empty()) {
    const Pending p = stack.back();
    stack.pop_back();
    const auto first = sample.begin() + static_cast<std::ptrdiff_t>(p.begin);
    const auto last = sample.begin() + static_cast<std::ptrdiff_t>(p.end);
    nodes_[p.node].size = static_cast<std::uint32_t>(p.end - p.begin);
    if (p.depth >= height_limit_ || p.end - p.begin <= 1) continue;
    const auto [lo_it, hi_it] = std::minmax_element(first, last);
    const double lo = *lo_it, hi = *hi_it;
    if (lo == hi) continue;

    std::uniform_real_distribution<double> dist(lo, hi);
    double split = dist(rng);
    while (!(split > lo && split < hi)) split = dist(rng);

    const auto mid = std::partition(first, last, [split](double x) { return x < split; });
    const std::size_t cut = static_cast<std::size_t>(mid - sample.begin());
    const auto left = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(Node{});
    nodes_.push_back(Node{});
    nodes_[p.node].split = split;
    nodes_[p.node].left = left;
    nodes_[p.node].right = left + 1;
    stack.push_back({static_cast<std::size_t>(left) + 1, cut, p.end, p.depth + 1});
    stack.push_back({static_cast<std::size_t>(left), p.begin, cut, p.depth + 1});
  }
}

double ITree::path_length(double x) const {
  std::size_t depth = 0;
  const Node* node = &nodes_[0];
  while (!node->leaf()) {
    node = &nodes_[static_cast<std::size_t>(x < node->split ? node->left : node->right)];
    ++depth;
  }
  return static_cast<double>(depth) + average_path_c(node->size);
}

std::size_t ITree::height() const {
  std::vector<std::size_t> depth(nodes_.size(), 0);
  std::size_t h = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    h = std::max(h, depth[i]);
    if (!nodes_[i].leaf()) {
      depth[static_cast<std::size_t>(nodes_[i].left)] = depth[i] + 1;
      depth[static_cast<std::size_t>(nodes_[i].right)] = depth[i] + 1;
    }
  }
  return h;
}

IsolationForest IsolationForest::build(std::span<const double> values, int trees, int subsample,
                                       std::uint64_t seed) {
  if (trees < 1) throw Error("anomaly", "isolation forest needs at least one tree");
  if (subsample < 2) throw Error("anomaly", "isolation forest subsample size must be >= 2");
  if (values.size() < 2) throw Error("anomaly", "isolation forest needs at least 2 values");
  for (double v : values) {
    if (!std::isfinite(v)) throw Error("anomaly", "isolation forest input must be finite");
  }

  const std::size_t psi = std::min(static_cast<std::size_t>(subsample), values.size());
  const auto height_limit = static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(psi))));

  std::vector<ITree> built;
  built.reserve(static_cast<std::size_t>(trees));
  std::vector<std::size_t> idx(values.size());
  for (int t = 0; t < trees; ++t) {
    // Subsample without replacement: partial Fisher-Yates with a per-tree stream.
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(t), 0x5eedu};
    std::mt19937_64 rng(seq);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<double> sample(psi);
    for (std::size_t i = 0; i < psi; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
      std::swap(idx[i], idx[pick(rng)]);
      sample[i] = values[idx[i]];
    }
    built.emplace_back(std::move(sample), height_limit, seed, static_cast<std::uint64_t>(t));
  }
  return IsolationForest(std::move(built), psi, seed);
}

double IsolationForest::score(double x) const {
  double total = 0.0;
  for (const ITree& t : trees_) total += t.path_length(x);
  const double mean_path = total / static_cast<double>(trees_.size());
  return anomaly_score(mean_path, subsample_);
}

std::vector<double> IsolationForest::scores(std::span<const double> values) const {
  std::vector<double> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(), [this](double x) { return score(x); });
  return out;
}

IsolationForest build_isolation_forest(std::span<const double> values, int trees, int subsample,
                                       std::uint64_t seed) {
  return IsolationForest::build(values, trees, subsample, seed);
}

std::vector<double> iforest_scores(const IsolationForest& model, std::span<const double> values) {
  return model.scores(values);
}

OutlierMask iforest_mask(std::span<const double> scores, const IsolationForestParams& params) {
  if (!(params.threshold > 0.0 && params.threshold < 1.0)) {
    throw Error("anomaly", "score threshold must lie in (0, 1)");
  }
  std::vector<bool> flags(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) flags[i] = scores[i] > params.threshold;
  return OutlierMask(std::move(flags), DetectionMethod::isolation_forest, params);
}

OutlierMask iforest_mask(std::span<const double> scores, double threshold) {
  IsolationForestParams p;
  p.threshold = threshold;
  return iforest_mask(scores, p);
}

OutlierMask detect_outliers(std::span<const double> values, DetectionMethod method,
                            double sigma_k, const IsolationForestParams& forest,
                            std::vector<double>* scores) {
  if (method == DetectionMethod::three_sigma) {
    OutlierMask mask = three_sigma_mask(values, sigma_k);
    if (scores != nullptr) {
      *scores = z_scores(values);
      for (double& z : *scores) z = std::abs(z);
    }
    return mask;
  }
  const IsolationForest model =
      IsolationForest::build(values, forest.trees, forest.subsample, forest.seed);
  std::vector<double> s = model.scores(values);
  OutlierMask mask = iforest_mask(s, forest);
  if (scores != nullptr) *scores = std::move(s);
  return mask;
}

std::vector<double> backward_fill_outliers(std::span<const double> values,
                                           const OutlierMask& mask) {
  if (mask.size() != values.size()) {
    throw Error("anomaly", "mask length " + std::to_string(mask.size()) +
                               " does not match series length " + std::to_string(values.size()));
  }
  std::vector<double> out(values.begin(), values.end());
  if (out.empty()) return out;

  // Trailing flagged run falls back to the last unflagged value before it.
  std::size_t last_clean = out.size();
  while (last_clean > 0 && mask[last_clean - 1]) --last_clean;
  if (last_clean == 0) throw Error("anomaly", "every point is flagged");
  for (std::size_t i = last_clean; i < out.size(); ++i) out[i] = values[last_clean - 1];

  double next = values[last_clean - 1];
  for (std::size_t i = last_clean; i-- > 0;) {
    if (mask[i]) {
      out[i] = next;
    } else {
      next = values[i];
    }
  }
  return out;
}

TimeSeries backward_fill_outliers(const TimeSeries& series, const OutlierMask& mask) {
  return series.with_values(backward_fill_outliers(series.values(), mask));
}

}  // namespace trafficseq
