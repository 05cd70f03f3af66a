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

// Telemetry ingestion and preparation: a regular-interval traffic series,
// its repair (missing values, partial trailing day), the train/holdout split,
// min-max scaling and the sliding-window supervised transform.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace trafficseq {

enum class Unit { bps, gbps };

inline constexpr std::int64_t kSecondsPerDay = 86400;
inline constexpr std::int64_t kDefaultIntervalS = 300;

struct TimePoint {
  std::int64_t timestamp = 0;  // seconds since the Unix epoch, UTC
  std::optional<double> value;

  bool operator==(const TimePoint&) const = default;
};

// Ordered samples on a fixed grid. Gaps are explicit missing points.
class TimeSeries {
 public:
  TimeSeries(std::vector<TimePoint> points, std::int64_t interval_s, Unit unit);

  std::span<const TimePoint> points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  std::int64_t interval_s() const noexcept { return interval_s_; }
  Unit unit() const noexcept { return unit_; }
  const TimePoint& operator[](std::size_t i) const { return points_[i]; }

  std::size_t samples_per_day() const noexcept {
    return static_cast<std::size_t>(kSecondsPerDay / interval_s_);
  }
  std::size_t missing_count() const noexcept;
  bool has_missing() const noexcept { return missing_count() > 0; }

  // Dense values; throws if any point is missing.
  std::vector<double> values() const;
  std::vector<std::int64_t> timestamps() const;

  // Same grid, new values (one per point).
  TimeSeries with_values(std::span<const double> values) const;
  TimeSeries slice(std::size_t begin, std::size_t end) const;

  bool operator==(const TimeSeries&) const = default;

 private:
  std::vector<TimePoint> points_;
  std::int64_t interval_s_;
  Unit unit_;
};

struct TelemetryFields {
  std::string timestamp = "timestamp";
  std::string value = "bps";
  std::int64_t interval_s = kDefaultIntervalS;
};

// Accepts "YYYY-MM-DDTHH:MM:SS[.frac][Z|+00:00]" (a space may replace 'T').
std::optional<std::int64_t> parse_iso8601_utc(std::string_view text);

// Reads a JSON array of records. Only the timestamp and value fields are
// used; a null value is a missing sample. Slots of the regular grid with no
// record become missing points.
TimeSeries parse_telemetry(std::string_view text, const TelemetryFields& fields = {});

TimeSeries to_gbps(const TimeSeries& series);

// Replaces each missing value with the previous present one.
TimeSeries forward_fill(const TimeSeries& series);

// Removes the final UTC calendar day if it holds fewer than a full day of
// grid slots.
TimeSeries drop_incomplete_trailing_day(const TimeSeries& series);

std::pair<TimeSeries, TimeSeries> train_holdout_split(const TimeSeries& series,
                                                      int train_days = 21,
                                                      int holdout_days = 8);

// Affine map of [lo, hi] onto [0, 1]. Values outside the fitted range are
// not clamped.
class Scaler {
 public:
  Scaler(double lo, double hi);

  static Scaler fit(std::span<const double> values);
  static Scaler fit(const TimeSeries& series);

  double apply(double x) const noexcept { return (x - lo_) / (hi_ - lo_); }
  double invert(double y) const noexcept { return lo_ + y * (hi_ - lo_); }
  std::vector<double> apply(std::span<const double> xs) const;
  std::vector<double> invert(std::span<const double> ys) const;

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }

  bool operator==(const Scaler&) const = default;

 private:
  double lo_;
  double hi_;
};

// Row i of `features` is values[i, i+w); targets[i] is values[i+w].
struct WindowedDataset {
  std::vector<double> features;  // n_samples x window_w, row-major
  std::vector<double> targets;
  std::size_t window_w = 0;
  std::optional<Scaler> scaler;  // set once the values are in scaled space

  std::size_t n_samples() const noexcept { return targets.size(); }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(features).subspan(i * window_w, window_w);
  }
  WindowedDataset subset(std::size_t begin, std::size_t end) const;
};

WindowedDataset make_windows(std::span<const double> values, std::size_t w);
WindowedDataset make_windows(const TimeSeries& series, std::size_t w);

// Windows of the scaled values; the dataset carries the scaler.
WindowedDataset make_scaled_windows(std::span<const double> values, std::size_t w,
                                    const Scaler& scaler);

}  // namespace trafficseq
