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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "envmon/series_csv.hpp"

namespace envmon::analytics {

/// |measured - reference| / |reference| * 100, not rounded.
/// Throws Error(ZeroReference).
double percentage_error_exact(double reference, double measured);

/// percentage_error_exact rounded half away from zero to 2 decimal places.
double percentage_error(double reference, double measured);

double round_to(double value, int decimals) noexcept;

enum class ClarityLabel { Clear, PartlyCloudy, Cloudy };

std::string_view to_string(ClarityLabel label) noexcept;

/// Humidity band edges in %RH. Lower edge of each band is inclusive.
struct ClarityThresholds {
  double partly_cloudy_rh = 60.0;
  double cloudy_rh = 85.0;
};

// Throws Error(OutOfRange) outside [-40, 80] C / [0, 100] %RH.
ClarityLabel classify_clarity(double temperature_c, double humidity_rh,
                              const ClarityThresholds& thresholds = {});

struct TimedValue {
  std::int64_t timestamp_ms = 0;
  double value = 0.0;
};

struct AlignedPair {
  std::size_t measured_index = 0;
  std::size_t reference_index = 0;
  std::int64_t measured_ms = 0;
  std::int64_t reference_ms = 0;
  double measured = 0.0;
  double reference = 0.0;

  std::int64_t skew_ms() const noexcept {
    return measured_ms > reference_ms ? measured_ms - reference_ms : reference_ms - measured_ms;
  }
};

struct Alignment {
  std::vector<AlignedPair> pairs;
  std::size_t dropped = 0;
  std::int64_t max_skew_ms = 0;
};

/// Greedy nearest-neighbour matching in measured order. Each reference point
/// is used at most once; ties go to the earlier reference. Measured points
/// with no free reference within max_skew_ms are dropped and counted.
Alignment align_series(std::span<const TimedValue> reference, std::span<const TimedValue> measured,
                       std::int64_t max_skew_ms);

std::vector<TimedValue> temperature_channel(std::span<const SeriesPoint> series);
std::vector<TimedValue> humidity_channel(std::span<const SeriesPoint> series);

struct ChannelReport {
  std::string name;
  std::string unit;
  double reference_mean = 0.0;
  double measured_mean = 0.0;
  // Mean of per-pair errors, rounded to 2 decimals.
  double mean_pct_error = 0.0;
  std::size_t pairs = 0;
  std::size_t dropped = 0;
  std::size_t skipped_zero_reference = 0;
  std::int64_t max_skew_ms = 0;
  std::vector<AlignedPair> aligned;
};

struct ClarityRow {
  std::int64_t timestamp_ms = 0;
  ClarityLabel measured = ClarityLabel::Clear;
  std::optional<ClarityLabel> reference;
};

struct ErrorReport {
  ChannelReport temperature;
  ChannelReport humidity;
  std::vector<ClarityRow> clarity;
  std::vector<std::string> notes;

  std::size_t pairs() const noexcept { return temperature.pairs + humidity.pairs; }
  std::size_t dropped() const noexcept { return temperature.dropped + humidity.dropped; }
};

/// A percentage error printed in some earlier comparison table, checked
/// against the standard definitions.
struct PublishedFigure {
  std::string channel;
  double reference = 0.0;
  double measured = 0.0;
  double printed = 0.0;
};

/// Built-in list of externally published comparison figures the report
/// cross-checks whenever the same inputs show up.
std::span<const PublishedFigure> known_published_figures() noexcept;

/// True if `printed` equals |m-r|/|r| or |m-r|/|m| (x100) after rounding to
/// the number of decimals `printed` was given with (integer or 2 places).
bool reproduces_published_figure(const PublishedFigure& figure);

/// Aligns each channel against the reference, averages per-pair errors.
/// Throws Error(EmptyOverlap) when either channel ends up with no pairs.
ErrorReport build_report(std::span<const SeriesPoint> reference,
                         std::span<const TimedValue> measured_temperature,
                         std::span<const TimedValue> measured_humidity, std::int64_t max_skew_ms,
                         const ClarityThresholds& thresholds = {});

std::string render_text(const ErrorReport& report);
nlohmann::json to_json(const ErrorReport& report);

}  // namespace envmon::analytics
