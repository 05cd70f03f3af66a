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

// File formats shared by the CLI and the evaluation harness.

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "trafficseq/series.hpp"

namespace trafficseq::io {

std::string read_file(const std::string& path);

// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::string& path, std::string_view content);

// Fixed-format decimal used in every report and trace.
std::string fmt_fixed(double v, int digits = 6);
// Shortest text that reads back to the same double.
std::string fmt_exact(double v);

// "timestamp,gbps" (or "timestamp,bps"); missing values are empty fields.
std::string series_to_csv(const TimeSeries& series);
TimeSeries series_from_csv(std::string_view text, std::int64_t interval_s = kDefaultIntervalS);

// JSON array of {timestamp, value-in-bps} records; missing points are omitted.
std::string series_to_telemetry(const TimeSeries& series, const TelemetryFields& fields = {});

struct LoadOptions {
  TelemetryFields fields;
  bool drop_partial_day = true;
};

// Loads either a telemetry document (JSON) or a series CSV, then applies the
// ingest pipeline: drop an incomplete trailing day, convert to Gbps, forward
// fill. The format is sniffed from the first non-blank character.
TimeSeries load_series(const std::string& path, const LoadOptions& options = {});
TimeSeries ingest_telemetry(std::string_view text, const LoadOptions& options = {});

}  // namespace trafficseq::io
