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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "trafficseq/anomaly.hpp"
#include "trafficseq/error.hpp"
#include "trafficseq/synthgen.hpp"

using namespace trafficseq;

namespace {

std::vector<double> spike_vector() {
  std::vector<double> v(100, 0.0);
  v[37] = 50.0;
  return v;
}

// Recall and false-positive rate of `flags` against `truth`.
std::pair<double, double> recall_fpr(const std::vector<bool>& flags,
                                     const std::vector<bool>& truth) {
  double tp = 0, pos = 0, fp = 0, neg = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i]) {
      ++pos;
      tp += flags[i] ? 1 : 0;
    } else {
      ++neg;
      fp += flags[i] ? 1 : 0;
    }
  }
  return {pos > 0 ? tp / pos : 1.0, neg > 0 ? fp / neg : 0.0};
}

SynthConfig smooth_config(std::uint64_t seed) {
  SynthConfig c;
  c.seed = seed;
  c.diurnal_amp = 1.0;
  c.weekly_amp = 0.3;
  c.noise_sigma = 1.0;
  c.anomaly_rate = 0.005;
  c.anomaly_magnitude_sigma = 8.0;
  return c;
}

}  // namespace

TEST_CASE("three-sigma flags the lone spike") {
  const auto v = spike_vector();
  // Oracle: mu = 0.5, sigma = sqrt((99 * 0.25 + 49.5^2) / 100).
  const double mu = 0.5;
  const double sigma = std::sqrt((99 * 0.25 + 49.5 * 49.5) / 100.0);
  CHECK(sigma == doctest::Approx(4.975).epsilon(1e-3));
  const auto mask = three_sigma_mask(v);
  CHECK(mask.count() == 1);
  CHECK(mask[37]);
  const auto& p = std::get<ThreeSigmaParams>(mask.params());
  CHECK(p.mean == doctest::Approx(mu).epsilon(1e-14));
  CHECK(p.stddev == doctest::Approx(sigma).epsilon(1e-14));
  CHECK(mask.method() == DetectionMethod::three_sigma);
}

TEST_CASE("three-sigma on standard normal noise") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> x(10000);
  for (double& v : x) v = d(rng);
  const auto mask = three_sigma_mask(x);
  CHECK(mask.count() < 100);
}

TEST_CASE("three-sigma errors") {
  CHECK_THROWS_AS(three_sigma_mask(std::vector<double>{5, 5, 5, 5}), Error);
  CHECK_THROWS_AS(three_sigma_mask(std::vector<double>{5}), Error);
  CHECK_THROWS_AS(three_sigma_mask(std::vector<double>{1, 2, 3}, 0.0), Error);
}

TEST_CASE("three-sigma uses a strict inequality") {
  // [-1, 1]: mu = 0, sigma = 1, both points sit exactly at 1 sigma.
  const std::vector<double> x{-1.0, 1.0};
  CHECK(three_sigma_mask(x, 1.0).count() == 0);
  // Just inside the band both points would be flagged, which a mask rejects.
  CHECK_THROWS_AS(three_sigma_mask(x, 0.999), Error);
}

TEST_CASE("three-sigma decisions are affine invariant") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> x(2000);
  for (double& v : x) v = d(rng);
  x[10] = 9.0;
  x[500] = -7.0;
  const auto base = three_sigma_mask(x).flags();
  for (auto [a, b] : {std::pair{3.0, 1.0}, std::pair{-2.0, 5.0}, std::pair{0.01, -40.0}}) {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = a * x[i] + b;
    CHECK(three_sigma_mask(y).flags() == base);
  }
}

TEST_CASE("average_path_c") {
  CHECK(average_path_c(0) == 0.0);
  CHECK(average_path_c(1) == 0.0);
  CHECK(average_path_c(2) == 1.0);
  // Oracle: 2 (ln 255 + gamma) - 2 * 255 / 256.
  const double expected = 2.0 * (std::log(255.0) + 0.5772156649) - 2.0 * 255.0 / 256.0;
  CHECK(average_path_c(256) == doctest::Approx(expected).epsilon(1e-15));
  CHECK(average_path_c(256) == doctest::Approx(10.2445).epsilon(1e-4));
}

TEST_CASE("anomaly score formula") {
  CHECK(anomaly_score(average_path_c(256), 256) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(anomaly_score(0.0, 256) == 1.0);
  CHECK(anomaly_score(1e-9, 256) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(anomaly_score(40.0, 256) < 0.1);
}

TEST_CASE("isolation forest construction rules") {
  SUBCASE("two points, one tree") {
    const auto f = build_isolation_forest(std::vector<double>{1.0, 2.0}, 1, 256, 5);
    REQUIRE(f.trees().size() == 1);
    CHECK(f.trees()[0].height() <= 1);
    CHECK(f.subsample_size() == 2);
  }
  SUBCASE("all-equal values give single-leaf trees") {
    const auto f = build_isolation_forest(std::vector<double>(50, 4.0), 10, 16, 5);
    for (const auto& t : f.trees()) CHECK(t.nodes().size() == 1);
  }
  SUBCASE("errors") {
    const std::vector<double> v{1, 2, 3};
    CHECK_THROWS_AS(build_isolation_forest(v, 0, 256, 0), Error);
    CHECK_THROWS_AS(build_isolation_forest(v, 10, 1, 0), Error);
    CHECK_THROWS_AS(build_isolation_forest(std::vector<double>{1.0}, 10, 256, 0), Error);
  }
}

TEST_CASE("isolation tree structural invariants") {
  std::mt19937_64 rng(11);
  std::lognormal_distribution<double> d(0.0, 1.0);
  std::vector<double> x(3000);
  for (double& v : x) v = d(rng);
  x[5] = x[6] = x[7];  // ties
  const auto f = build_isolation_forest(x, 25, 256, 42);
  CHECK(f.trees().size() == 25);
  for (const auto& t : f.trees()) {
    CHECK(t.height_limit() == 8);
    CHECK(t.height() <= t.height_limit());
    const auto nodes = t.nodes();
    CHECK(nodes[0].size == 256);
    for (const auto& n : nodes) {
      if (n.leaf()) continue;
      const auto& l = nodes[static_cast<std::size_t>(n.left)];
      const auto& r = nodes[static_cast<std::size_t>(n.right)];
      CHECK(l.size > 0);
      CHECK(r.size > 0);
      CHECK(l.size + r.size == n.size);
    }
  }
}

TEST_CASE("split values lie strictly inside the node range") {
  // Rebuild the node ranges by routing the tree's own training sample, which
  // is the forest's subsample; with psi == n the sample is the full input.
  std::vector<double> x{0.5, 1.5, 1.5, 2.0, 7.0, 7.5, 9.0, 9.0, 12.0, 13.0, 13.5, 20.0};
  const auto f = build_isolation_forest(x, 30, 64, 9);
  for (const auto& t : f.trees()) {
    const auto nodes = t.nodes();
    std::vector<std::vector<double>> at(nodes.size());
    at[0] = x;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].leaf()) {
        CHECK(at[i].size() == nodes[i].size);
        continue;
      }
      const auto [lo, hi] = std::minmax_element(at[i].begin(), at[i].end());
      CHECK(nodes[i].split > *lo);
      CHECK(nodes[i].split < *hi);
      for (double v : at[i]) {
        at[static_cast<std::size_t>(v < nodes[i].split ? nodes[i].left : nodes[i].right)].push_back(v);
      }
    }
  }
}

TEST_CASE("isolation forest is deterministic per seed") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> x(1000), probe(200);
  for (double& v : x) v = d(rng);
  for (double& v : probe) v = 3.0 * d(rng);
  const auto a = iforest_scores(build_isolation_forest(x, 50, 256, 77), probe);
  const auto b = iforest_scores(build_isolation_forest(x, 50, 256, 77), probe);
  const auto c = iforest_scores(build_isolation_forest(x, 50, 256, 78), probe);
  CHECK(a == b);
  CHECK(a != c);
  for (double s : a) {
    CHECK(s > 0.0);
    CHECK(s < 1.0);
  }
}

TEST_CASE("far point receives the maximum score") {
  for (std::uint64_t seed : {0u, 1u, 2u, 3u, 4u}) {
    std::mt19937_64 rng(seed + 100);
    std::normal_distribution<double> d(10.0, 0.5);
    std::vector<double> x(201);
    for (double& v : x) v = d(rng);
    x[123] = 40.0;
    const auto s = iforest_scores(build_isolation_forest(x, 100, 256, seed), x);
    CHECK(std::max_element(s.begin(), s.end()) - s.begin() == 123);
  }
}

TEST_CASE("iforest_mask thresholding") {
  const std::vector<double> s{.1, .7, .2};
  CHECK(iforest_mask(s, 0.6).flags() == std::vector<bool>{false, true, false});
  CHECK(iforest_mask(s, 0.9).count() == 0);
  CHECK_THROWS_AS(iforest_mask(s, 1.5), Error);
  CHECK_THROWS_AS(iforest_mask(s, 0.0), Error);
  CHECK_THROWS_AS(iforest_mask(std::vector<double>{.8, .9}, 0.6), Error);
}

TEST_CASE("mask rejects all-flagged vectors") {
  CHECK_THROWS_AS(OutlierMask({true, true}, DetectionMethod::three_sigma, ThreeSigmaParams{}),
                  Error);
  const OutlierMask m({false, true, false, true}, DetectionMethod::three_sigma,
                      ThreeSigmaParams{});
  CHECK(m.indices() == std::vector<std::size_t>{1, 3});
}

TEST_CASE("backward fill examples") {
  auto mk = [](std::vector<bool> f) {
    return OutlierMask(std::move(f), DetectionMethod::three_sigma, ThreeSigmaParams{});
  };
  CHECK(backward_fill_outliers(std::vector<double>{1, 100, 3}, mk({false, true, false})) ==
        std::vector<double>{1, 3, 3});
  CHECK(backward_fill_outliers(std::vector<double>{1, 2, 99}, mk({false, false, true})) ==
        std::vector<double>{1, 2, 2});
  CHECK(backward_fill_outliers(std::vector<double>{4, 5, 6}, mk({false, false, false})) ==
        std::vector<double>{4, 5, 6});
  CHECK(backward_fill_outliers(std::vector<double>{9, 9, 1, 8, 8, 7},
                               mk({true, true, false, true, true, false})) ==
        std::vector<double>{1, 1, 1, 7, 7, 7});
  CHECK_THROWS_AS(backward_fill_outliers(std::vector<double>{1, 2}, mk({false, true, false})),
                  Error);
}

TEST_CASE("backward fill on a series keeps timestamps") {
  std::vector<TimePoint> pts;
  for (int i = 0; i < 4; ++i) pts.push_back({1609459200 + 300 * i, 1.0 + i});
  const TimeSeries ts(pts, 300, Unit::gbps);
  const OutlierMask m({false, true, false, false}, DetectionMethod::three_sigma,
                      ThreeSigmaParams{});
  const auto out = backward_fill_outliers(ts, m);
  CHECK(out.timestamps() == ts.timestamps());
  CHECK(out.values() == std::vector<double>{1, 3, 3, 4});
}

TEST_CASE("backward fill is idempotent and introduces no new values") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(40);
    std::vector<bool> f(40);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = d(rng);
      f[i] = d(rng) < 0.3;
    }
    f[static_cast<std::size_t>(trial) % 40] = false;
    const OutlierMask m(f, DetectionMethod::three_sigma, ThreeSigmaParams{});
    const auto once = backward_fill_outliers(x, m);
    CHECK(backward_fill_outliers(once, m) == once);
    const std::set<double> original(x.begin(), x.end());
    for (std::size_t i = 0; i < once.size(); ++i) {
      CHECK(original.count(once[i]) == 1);
      if (!f[i]) CHECK(once[i] == x[i]);
    }
  }
}

TEST_CASE("forest recovers large injected spikes at the default threshold") {
  double recall = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto synth = generate(smooth_config(seed));
    const auto values = synth.series.values();
    const IsolationForestParams params{100, 256, 0.6, seed};
    const auto mask = detect_outliers(values, DetectionMethod::isolation_forest, 3.0, params);
    recall += recall_fpr(mask.flags(), synth.anomalies).first / 5.0;
  }
  CHECK(recall >= 0.9);
}

TEST_CASE("raising the forest threshold shrinks the flag set") {
  const auto synth = generate(smooth_config(1));
  const auto values = synth.series.values();
  std::vector<double> scores;
  detect_outliers(values, DetectionMethod::isolation_forest, 3.0, {100, 256, 0.6, 1}, &scores);
  double prev_fpr = 1.0;
  std::vector<bool> prev(values.size(), true);
  for (double th : {0.55, 0.6, 0.65, 0.7, 0.75, 0.8}) {
    const auto mask = iforest_mask(scores, th);
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (mask[i]) CHECK(prev[i]);
    }
    const double fpr = recall_fpr(mask.flags(), synth.anomalies).second;
    CHECK(fpr <= prev_fpr);
    prev_fpr = fpr;
    prev = mask.flags();
  }
}
