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

#include "envmon/series_csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <string>
#include <string_view>

#include "envmon/error.hpp"
#include "envmon/text.hpp"

namespace envmon {

namespace {

[[noreturn]] void fail(std::size_t line_no, const std::string& msg) {
  throw Error(Errc::Parse, "line " + std::to_string(line_no) + ": " + msg);
}

}  // namespace

std::vector<SeriesPoint> read_series_csv(std::istream& in) {
  std::vector<SeriesPoint> points;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view row = text::trim(line);
    if (row.empty()) continue;
    if (!header_seen) {
      if (row != kSeriesCsvHeader) {
        fail(line_no, std::string("expected header '") + kSeriesCsvHeader + "'");
      }
      header_seen = true;
      continue;
    }

    auto fields = text::split(row, ',');
    if (fields.size() != 3) fail(line_no, "expected 3 fields");

    SeriesPoint p;
    auto ts = text::parse_int64(text::trim(fields[0]));
    auto temp = text::parse_double(text::trim(fields[1]));
    auto hum = text::parse_double(text::trim(fields[2]));
    if (!ts || !temp || !hum) fail(line_no, "unparsable field");
    p.timestamp_ms = *ts;
    p.temperature_c = *temp;
    p.humidity_rh = *hum;

    if (!points.empty() && p.timestamp_ms <= points.back().timestamp_ms) {
      fail(line_no, "timestamps must be strictly increasing");
    }
    points.push_back(p);
  }
  if (!header_seen) fail(line_no, "missing header");
  return points;
}

std::vector<SeriesPoint> read_series_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  try {
    return read_series_csv(in);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace envmon
