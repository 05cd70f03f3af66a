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

#include "trafficseq/io.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "trafficseq/error.hpp"

namespace trafficseq::io {
namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, std::string_view content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io", "cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("io", "write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw Error("io", "cannot move output into place at '" + path + "': " + ec.message());
}

std::string fmt_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string fmt_exact(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string series_to_csv(const TimeSeries& series) {
  std::string out = series.unit() == Unit::gbps ? "timestamp,gbps\n" : "timestamp,bps\n";
  for (const TimePoint& p : series.points()) {
    out += std::to_string(p.timestamp);
    out += ',';
    if (p.value) out += fmt_exact(*p.value);
    out += '\n';
  }
  return out;
}

TimeSeries series_from_csv(std::string_view text, std::int64_t interval_s) {
  std::vector<TimePoint> pts;
  Unit unit = Unit::gbps;
  bool header = true;
  std::size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (header) {
      header = false;
      if (fields.size() != 2 || trim(fields[0]) != "timestamp" ||
          (trim(fields[1]) != "gbps" && trim(fields[1]) != "bps")) {
        throw Error("parse", "series CSV must start with 'timestamp,gbps'");
      }
      unit = trim(fields[1]) == "gbps" ? Unit::gbps : Unit::bps;
      continue;
    }
    if (fields.size() != 2) {
      throw Error("parse", "line " + std::to_string(line_no) + ": expected 2 fields");
    }
    TimePoint p;
    const auto ts = trim(fields[0]);
    if (std::from_chars(ts.data(), ts.data() + ts.size(), p.timestamp).ec != std::errc{}) {
      throw Error("parse", "line " + std::to_string(line_no) + ": bad timestamp");
    }
    const auto vs = trim(fields[1]);
    if (!vs.empty()) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(vs.data(), vs.data() + vs.size(), v);
      if (ec != std::errc{} || ptr != vs.data() + vs.size()) {
        throw Error("parse", "line " + std::to_string(line_no) + ": bad value");
      }
      p.value = v;
    }
    pts.push_back(p);
  }
  if (pts.empty()) throw Error("parse", "series CSV has no rows");
  return TimeSeries(std::move(pts), interval_s, unit);
}

std::string series_to_telemetry(const TimeSeries& series, const TelemetryFields& fields) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  const double to_bps = series.unit() == Unit::gbps ? 1e9 : 1.0;
  for (const TimePoint& p : series.points()) {
    if (!p.value) continue;
    nlohmann::ordered_json rec;
    rec[fields.timestamp] = p.timestamp;
    rec[fields.value] = *p.value * to_bps;
    doc.push_back(std::move(rec));
  }
  return doc.dump(1) + "\n";
}

TimeSeries ingest_telemetry(std::string_view text, const LoadOptions& options) {
  TimeSeries s = parse_telemetry(text, options.fields);
  if (options.drop_partial_day) s = drop_incomplete_trailing_day(s);
  return forward_fill(to_gbps(s));
}

TimeSeries load_series(const std::string& path, const LoadOptions& options) {
  const std::string text = read_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (text[first] == '[' || text[first] == '{')) {
    return ingest_telemetry(text, options);
  }
  TimeSeries s = series_from_csv(text, options.fields.interval_s);
  if (s.unit() == Unit::bps) s = to_gbps(s);
  return forward_fill(s);
}

}  // namespace trafficseq::io
