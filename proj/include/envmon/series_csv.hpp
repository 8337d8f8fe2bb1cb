/*
 * Copyright 2026 The envmon Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <vector>

namespace envmon {

/// One row of a `timestamp_ms,temperature_c,humidity_rh` file. Used both for
/// environment replay and for reference (ground-station) series.
struct SeriesPoint {
  std::int64_t timestamp_ms = 0;
  double temperature_c = 0.0;
  double humidity_rh = 0.0;

  friend bool operator==(const SeriesPoint&, const SeriesPoint&) = default;
};

inline constexpr const char* kSeriesCsvHeader = "timestamp_ms,temperature_c,humidity_rh";

// Throws Error(Parse) on a bad header, row, or non-increasing timestamps.
std::vector<SeriesPoint> read_series_csv(std::istream& in);
std::vector<SeriesPoint> read_series_csv(const std::filesystem::path& path);

}  // namespace envmon
