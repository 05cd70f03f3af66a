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

#include <random>
#include <string>

#include "trafficseq/error.hpp"
#include "trafficseq/io.hpp"
#include "trafficseq/series.hpp"

using namespace trafficseq;

namespace {

constexpr std::int64_t kMidnight = 1609459200;  // 2021-01-01T00:00:00Z

TimeSeries gbps_series(std::vector<std::optional<double>> values, std::int64_t start = kMidnight) {
  std::vector<TimePoint> pts;
  for (std::size_t i = 0; i < values.size(); ++i) {
    pts.push_back({start + static_cast<std::int64_t>(i) * 300, values[i]});
  }
  return TimeSeries(std::move(pts), 300, Unit::gbps);
}

TimeSeries ramp(std::size_t n, std::int64_t start = kMidnight) {
  std::vector<std::optional<double>> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back(1.0 + static_cast<double>(i % 17));
  return gbps_series(v, start);
}

}  // namespace

TEST_CASE("parse_telemetry builds a regular grid") {
  const auto s = parse_telemetry(R"([{"timestamp":0,"bps":1e9},{"timestamp":300,"bps":2e9}])");
  CHECK(s.size() == 2);
  CHECK(s.unit() == Unit::bps);
  CHECK(*s[1].value == 2e9);

  const auto gap = parse_telemetry(R"([{"timestamp":600,"bps":5},{"timestamp":0,"bps":1,"other":"x"}])");
  REQUIRE(gap.size() == 3);
  CHECK(gap[0].timestamp == 0);
  CHECK_FALSE(gap[1].value.has_value());
  CHECK(*gap[2].value == 5.0);
}

TEST_CASE("parse_telemetry accepts ISO-8601 timestamps and custom field names") {
  TelemetryFields f;
  f.timestamp = "time";
  f.value = "rate";
  const auto s = parse_telemetry(
      R"([{"time":"2021-01-01T00:00:00Z","rate":3},{"time":"2021-01-01 00:05:00","rate":4}])", f);
  REQUIRE(s.size() == 2);
  CHECK(s[0].timestamp == kMidnight);
  CHECK(s[1].timestamp == kMidnight + 300);
  CHECK(parse_iso8601_utc("1970-01-01T00:05:00.250+00:00") == 300);
  CHECK_FALSE(parse_iso8601_utc("2021-02-30T00:00:00Z").has_value());
  CHECK_FALSE(parse_iso8601_utc("yesterday").has_value());
}

TEST_CASE("parse_telemetry errors") {
  CHECK_THROWS_AS(parse_telemetry(R"([{"timestamp":0,"bps":-1}])"), Error);
  CHECK_THROWS_AS(parse_telemetry("[]"), Error);
  CHECK_THROWS_AS(parse_telemetry("{not json"), Error);
  CHECK_THROWS_AS(parse_telemetry(R"([{"timestamp":0,"bps":1},{"timestamp":0,"bps":2}])"), Error);
  CHECK_THROWS_AS(parse_telemetry(R"([{"timestamp":0,"bps":1},{"timestamp":7,"bps":2}])"), Error);
  try {
    parse_telemetry(R"([{"timestamp":0,"bps":1},{"timestamp":300}])");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("record 1") != std::string::npos);
    CHECK(e.stage() == "parse");
  }
}

TEST_CASE("to_gbps") {
  auto raw = parse_telemetry(R"([{"timestamp":0,"bps":1e9},{"timestamp":600,"bps":0}])");
  const auto g = to_gbps(raw);
  CHECK(g.unit() == Unit::gbps);
  CHECK(*g[0].value == 1.0);
  CHECK_FALSE(g[1].value.has_value());
  CHECK(*g[2].value == 0.0);
  CHECK_THROWS_AS(to_gbps(g), Error);
}

TEST_CASE("forward_fill") {
  const auto filled = forward_fill(gbps_series({1.0, std::nullopt, std::nullopt, 4.0}));
  CHECK(filled.values() == std::vector<double>{1.0, 1.0, 1.0, 4.0});
  const auto full = gbps_series({1.0, 2.0});
  CHECK(forward_fill(full) == full);
  CHECK_THROWS_AS(forward_fill(gbps_series({std::nullopt, 2.0})), Error);
}

TEST_CASE("forward_fill is idempotent and the ingest pipeline keeps the grid") {
  std::mt19937_64 rng(3);
  std::bernoulli_distribution gap(0.2);
  for (int trial = 0; trial < 50; ++trial) {
    std::string doc = "[";
    const int n = 20 + trial;
    bool first = true;
    for (int i = 0; i < n; ++i) {
      if (i > 0 && i + 1 < n && gap(rng)) continue;
      if (!first) doc += ",";
      first = false;
      doc += R"({"timestamp":)" + std::to_string(300 * i) + R"(,"bps":)" + std::to_string(1e8 * (i + 1)) + "}";
    }
    doc += "]";
    const auto parsed = parse_telemetry(doc);
    const auto once = forward_fill(to_gbps(parsed));
    CHECK(forward_fill(once) == once);
    CHECK(once.size() == parsed.size());
    CHECK(once.timestamps() == parsed.timestamps());
    CHECK_FALSE(once.has_missing());
  }
}

TEST_CASE("drop_incomplete_trailing_day") {
  const auto partial = ramp(29 * 288 + 35);
  CHECK(drop_incomplete_trailing_day(partial).size() == 8352);
  const auto whole = ramp(2 * 288);
  CHECK(drop_incomplete_trailing_day(whole) == whole);
  CHECK_THROWS_AS(drop_incomplete_trailing_day(ramp(10)), Error);
}

TEST_CASE("train_holdout_split") {
  const auto [train, holdout] = train_holdout_split(ramp(29 * 288));
  CHECK(train.size() == 6048);
  CHECK(holdout.size() == 2304);
  CHECK(holdout[0].timestamp == train[train.size() - 1].timestamp + 300);

  const auto [a, b] = train_holdout_split(ramp(576), 1, 1);
  CHECK(a.size() == 288);
  CHECK(b.size() == 288);

  try {
    train_holdout_split(ramp(28 * 288));
    FAIL("expected a length error");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("8352") != std::string::npos);
    CHECK(msg.find("8064") != std::string::npos);
  }
}

TEST_CASE("scaler") {
  const std::vector<double> v{2.0, 4.0, 6.0};
  const Scaler s = Scaler::fit(v);
  CHECK(s.lo() == 2.0);
  CHECK(s.hi() == 6.0);
  CHECK(s.apply(4.0) == 0.5);
  CHECK(s.invert(s.apply(3.7)) == doctest::Approx(3.7).epsilon(1e-9));
  CHECK(s.apply(8.0) == 1.5);
  CHECK_THROWS_AS(Scaler::fit(std::vector<double>{5.0, 5.0}), Error);
  CHECK_THROWS_AS(Scaler(1.0, 1.0), Error);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(s.lo() - 4.0, s.hi() + 4.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = d(rng);
    CHECK(std::abs(s.invert(s.apply(x)) - x) <= 1e-9 * std::max(1.0, std::abs(x)));
  }
}

TEST_CASE("make_windows") {
  const std::vector<double> v{1, 2, 3, 4, 5};
  const auto ds = make_windows(v, 3);
  CHECK(ds.n_samples() == 2);
  CHECK(ds.features == std::vector<double>{1, 2, 3, 2, 3, 4});
  CHECK(ds.targets == std::vector<double>{4, 5});
  CHECK(make_windows(std::vector<double>(7, 1.0), 6).n_samples() == 1);
  CHECK_THROWS_AS(make_windows(std::vector<double>(6, 1.0), 6), Error);
}

TEST_CASE("windows reconstruct the series") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(0.0, 10.0);
  for (std::size_t w = 1; w <= 8; ++w) {
    std::vector<double> v(40);
    for (double& x : v) x = d(rng);
    const auto ds = make_windows(v, w);
    std::vector<double> rebuilt(ds.row(0).begin(), ds.row(0).end());
    rebuilt.insert(rebuilt.end(), ds.targets.begin(), ds.targets.end());
    CHECK(rebuilt == v);
    CHECK(ds.n_samples() == v.size() - w);
  }
}

TEST_CASE("series CSV and telemetry round trip") {
  const auto s = gbps_series({1.5, std::nullopt, 2.25, 0.125});
  const std::string csv = io::series_to_csv(s);
  CHECK(csv.rfind("timestamp,gbps\n", 0) == 0);
  CHECK(io::series_from_csv(csv) == s);

  const auto back = to_gbps(parse_telemetry(io::series_to_telemetry(s)));
  REQUIRE(back.size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(back[i].value.has_value() == s[i].value.has_value());
    if (s[i].value) CHECK(*back[i].value == doctest::Approx(*s[i].value).epsilon(1e-12));
  }
}
