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

#include "trafficseq/series.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <json.hpp>

#include "trafficseq/error.hpp"

namespace trafficseq {
namespace {

// Refuse to materialize absurd grids from a stray timestamp.
constexpr std::int64_t kMaxGridSlots = 50'000'000;

void check_interval(std::int64_t interval_s) {
  if (interval_s <= 0 || kSecondsPerDay % interval_s != 0) {
    throw Error("series", "interval must be a positive divisor of 86400 s, got " +
                              std::to_string(interval_s));
  }
}

bool parse_int(std::string_view s, int& out) {
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && p == end;
}

}  // namespace

TimeSeries::TimeSeries(std::vector<TimePoint> points, std::int64_t interval_s, Unit unit)
    : points_(std::move(points)), interval_s_(interval_s), unit_(unit) {
  check_interval(interval_s_);
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const TimePoint& p = points_[i];
    if (p.timestamp < 0) {
      throw Error("series", "negative timestamp at index " + std::to_string(i));
    }
    if (p.value && (!std::isfinite(*p.value) || *p.value < 0.0)) {
      throw Error("series", "value at index " + std::to_string(i) + " must be finite and >= 0");
    }
    if (i > 0 && p.timestamp - points_[i - 1].timestamp != interval_s_) {
      throw Error("series", "timestamps must advance by exactly " + std::to_string(interval_s_) +
                                " s (index " + std::to_string(i) + ")");
    }
  }
}

std::size_t TimeSeries::missing_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(points_.begin(), points_.end(), [](const TimePoint& p) { return !p.value; }));
}

std::vector<double> TimeSeries::values() const {
  std::vector<double> out;
  out.reserve(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!points_[i].value) {
      throw Error("series", "missing value at index " + std::to_string(i));
    }
    out.push_back(*points_[i].value);
  }
  return out;
}

std::vector<std::int64_t> TimeSeries::timestamps() const {
  std::vector<std::int64_t> out;
  out.reserve(points_.size());
  for (const TimePoint& p : points_) out.push_back(p.timestamp);
  return out;
}

TimeSeries TimeSeries::with_values(std::span<const double> values) const {
  if (values.size() != points_.size()) {
    throw Error("series", "value count " + std::to_string(values.size()) +
                              " does not match series length " + std::to_string(points_.size()));
  }
  std::vector<TimePoint> pts = points_;
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i].value = values[i];
  return TimeSeries(std::move(pts), interval_s_, unit_);
}

TimeSeries TimeSeries::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > points_.size()) throw Error("series", "slice out of range");
  return TimeSeries(std::vector<TimePoint>(points_.begin() + static_cast<std::ptrdiff_t>(begin),
                                           points_.begin() + static_cast<std::ptrdiff_t>(end)),
                    interval_s_, unit_);
}

std::optional<std::int64_t> parse_iso8601_utc(std::string_view s) {
  // YYYY-MM-DDTHH:MM:SS
  if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') ||
      s[13] != ':' || s[16] != ':') {
    return std::nullopt;
  }
  int y = 0, mo = 0, d = 0, hh = 0, mm = 0, ss = 0;
  if (!parse_int(s.substr(0, 4), y) || !parse_int(s.substr(5, 2), mo) ||
      !parse_int(s.substr(8, 2), d) || !parse_int(s.substr(11, 2), hh) ||
      !parse_int(s.substr(14, 2), mm) || !parse_int(s.substr(17, 2), ss)) {
    return std::nullopt;
  }
  std::string_view rest = s.substr(19);
  if (!rest.empty() && rest.front() == '.') {
    std::size_t k = 1;
    while (k < rest.size() && rest[k] >= '0' && rest[k] <= '9') ++k;
    if (k == 1) return std::nullopt;
    rest.remove_prefix(k);
  }
  if (!(rest.empty() || rest == "Z" || rest == "+00:00" || rest == "+0000")) return std::nullopt;

  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 60) return std::nullopt;
  const auto days_since = sys_days{ymd}.time_since_epoch().count();
  return static_cast<std::int64_t>(days_since) * kSecondsPerDay + hh * 3600 + mm * 60 + ss;
}

TimeSeries parse_telemetry(std::string_view text, const TelemetryFields& fields) {
  check_interval(fields.interval_s);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("parse", std::string("malformed document: ") + e.what());
  }
  if (!doc.is_array()) throw Error("parse", "document must be an array of records");
  if (doc.empty()) throw Error("parse", "document contains no records");

  struct Record {
    std::int64_t ts;
    std::optional<double> value;
    std::size_t index;
  };
  std::vector<Record> records;
  records.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& rec = doc[i];
    auto fail = [&](const std::string& why) -> Error {
      return Error("parse", "record " + std::to_string(i) + ": " + why);
    };
    if (!rec.is_object()) throw fail("not an object");

    const auto ts_it = rec.find(fields.timestamp);
    if (ts_it == rec.end()) throw fail("missing field '" + fields.timestamp + "'");
    std::int64_t ts = 0;
    if (ts_it->is_number_integer()) {
      ts = ts_it->get<std::int64_t>();
    } else if (ts_it->is_number_float()) {
      const double t = ts_it->get<double>();
      if (!std::isfinite(t) || t != std::floor(t)) throw fail("timestamp is not whole seconds");
      ts = static_cast<std::int64_t>(t);
    } else if (ts_it->is_string()) {
      const auto parsed = parse_iso8601_utc(ts_it->get_ref<const std::string&>());
      if (!parsed) throw fail("unrecognized timestamp '" + ts_it->get<std::string>() + "'");
      ts = *parsed;
    } else {
      throw fail("timestamp must be a number or an ISO-8601 string");
    }
    if (ts < 0) throw fail("timestamp before the epoch");

    const auto v_it = rec.find(fields.value);
    if (v_it == rec.end()) throw fail("missing field '" + fields.value + "'");
    std::optional<double> value;
    if (v_it->is_number()) {
      const double v = v_it->get<double>();
      if (!std::isfinite(v) || v < 0.0) throw fail("value must be finite and >= 0");
      value = v;
    } else if (!v_it->is_null()) {
      throw fail("value must be a number or null");
    }
    records.push_back({ts, value, i});
  }

  std::sort(records.begin(), records.end(),
            [](const Record& a, const Record& b) { return a.ts < b.ts; });
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].ts == records[i - 1].ts) {
      throw Error("parse", "duplicate timestamp " + std::to_string(records[i].ts) + " (records " +
                               std::to_string(records[i - 1].index) + " and " +
                               std::to_string(records[i].index) + ")");
    }
  }

  const std::int64_t t0 = records.front().ts;
  const std::int64_t span = records.back().ts - t0;
  if (span / fields.interval_s + 1 > kMaxGridSlots) throw Error("parse", "time span too large");
  std::vector<TimePoint> grid(static_cast<std::size_t>(span / fields.interval_s + 1));
  for (std::size_t k = 0; k < grid.size(); ++k) {
    grid[k].timestamp = t0 + static_cast<std::int64_t>(k) * fields.interval_s;
  }
  for (const Record& r : records) {
    if ((r.ts - t0) % fields.interval_s != 0) {
      throw Error("parse", "record " + std::to_string(r.index) + ": timestamp " +
                               std::to_string(r.ts) + " is off the " +
                               std::to_string(fields.interval_s) + " s grid");
    }
    grid[static_cast<std::size_t>((r.ts - t0) / fields.interval_s)].value = r.value;
  }
  return TimeSeries(std::move(grid), fields.interval_s, Unit::bps);
}

TimeSeries to_gbps(const TimeSeries& series) {
  if (series.unit() != Unit::bps) throw Error("series", "series is already in Gbps");
  std::vector<TimePoint> pts(series.points().begin(), series.points().end());
  for (TimePoint& p : pts) {
    if (p.value) *p.value /= 1e9;
  }
  return TimeSeries(std::move(pts), series.interval_s(), Unit::gbps);
}

TimeSeries forward_fill(const TimeSeries& series) {
  std::vector<TimePoint> pts(series.points().begin(), series.points().end());
  if (!pts.empty() && !pts.front().value) {
    throw Error("series", "cannot forward-fill: first value is missing");
  }
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (!pts[i].value) pts[i].value = pts[i - 1].value;
  }
  return TimeSeries(std::move(pts), series.interval_s(), series.unit());
}

TimeSeries drop_incomplete_trailing_day(const TimeSeries& series) {
  if (series.empty()) throw Error("series", "empty series");
  const std::int64_t last_day = series.points().back().timestamp / kSecondsPerDay;
  std::size_t first_of_day = series.size();
  while (first_of_day > 0 &&
         series[first_of_day - 1].timestamp / kSecondsPerDay == last_day) {
    --first_of_day;
  }
  const std::size_t in_last_day = series.size() - first_of_day;
  if (in_last_day >= series.samples_per_day()) return series;
  if (first_of_day == 0) {
    throw Error("series", "dropping the incomplete trailing day leaves no data");
  }
  return series.slice(0, first_of_day);
}

std::pair<TimeSeries, TimeSeries> train_holdout_split(const TimeSeries& series, int train_days,
                                                      int holdout_days) {
  if (train_days < 1 || holdout_days < 1) {
    throw Error("series", "train and holdout day counts must be positive");
  }
  const std::size_t per_day = series.samples_per_day();
  const std::size_t expected = static_cast<std::size_t>(train_days + holdout_days) * per_day;
  if (series.size() != expected) {
    throw Error("series", "split expects " + std::to_string(expected) + " points (" +
                              std::to_string(train_days) + "+" + std::to_string(holdout_days) +
                              " days), got " + std::to_string(series.size()));
  }
  if (series.has_missing()) throw Error("series", "split requires a series without gaps");
  const std::size_t cut = static_cast<std::size_t>(train_days) * per_day;
  return {series.slice(0, cut), series.slice(cut, series.size())};
}

Scaler::Scaler(double lo, double hi) : lo_(lo), hi_(hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo)) {
    throw Error("series", "scaler needs finite bounds with hi > lo");
  }
}

Scaler Scaler::fit(std::span<const double> values) {
  if (values.empty()) throw Error("series", "cannot fit a scaler on no data");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*hi == *lo) throw Error("series", "cannot fit a scaler on a constant series");
  return Scaler(*lo, *hi);
}

Scaler Scaler::fit(const TimeSeries& series) { return fit(series.values()); }

std::vector<double> Scaler::apply(std::span<const double> xs) const {
  std::vector<double> out(xs.size());
  std::transform(xs.begin(), xs.end(), out.begin(), [this](double x) { return apply(x); });
  return out;
}

std::vector<double> Scaler::invert(std::span<const double> ys) const {
  std::vector<double> out(ys.size());
  std::transform(ys.begin(), ys.end(), out.begin(), [this](double y) { return invert(y); });
  return out;
}

WindowedDataset WindowedDataset::subset(std::size_t begin, std::size_t end) const {
  if (begin > end || end > n_samples()) throw Error("series", "dataset subset out of range");
  WindowedDataset out;
  out.window_w = window_w;
  out.scaler = scaler;
  out.features.assign(features.begin() + static_cast<std::ptrdiff_t>(begin * window_w),
                      features.begin() + static_cast<std::ptrdiff_t>(end * window_w));
  out.targets.assign(targets.begin() + static_cast<std::ptrdiff_t>(begin),
                     targets.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

WindowedDataset make_windows(std::span<const double> values, std::size_t w) {
  if (w == 0) throw Error("series", "window must be positive");
  if (values.size() <= w) {
    throw Error("series", "series of length " + std::to_string(values.size()) +
                              " is too short for window " + std::to_string(w));
  }
  WindowedDataset ds;
  ds.window_w = w;
  const std::size_t n = values.size() - w;
  ds.features.reserve(n * w);
  ds.targets.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    ds.features.insert(ds.features.end(), values.begin() + static_cast<std::ptrdiff_t>(i),
                       values.begin() + static_cast<std::ptrdiff_t>(i + w));
    ds.targets.push_back(values[i + w]);
  }
  return ds;
}

WindowedDataset make_windows(const TimeSeries& series, std::size_t w) {
  return make_windows(series.values(), w);
}

WindowedDataset make_scaled_windows(std::span<const double> values, std::size_t w,
                                    const Scaler& scaler) {
  WindowedDataset ds = make_windows(scaler.apply(values), w);
  ds.scaler = scaler;
  return ds;
}

}  // namespace trafficseq
