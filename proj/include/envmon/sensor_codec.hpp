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

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "envmon/series_csv.hpp"

namespace envmon::sensor {

inline constexpr std::int32_t kMinTemperatureTenths = -400;
inline constexpr std::int32_t kMaxTemperatureTenths = 800;
inline constexpr std::int32_t kMinHumidityTenths = 0;
inline constexpr std::int32_t kMaxHumidityTenths = 1000;
inline constexpr std::int64_t kMinSampleIntervalMs = 2000;

/// Rounds to the nearest tenth, halves away from zero.
std::int64_t quantize_tenths(double value) noexcept;

/// A decoded sensor measurement. Values are held as integer tenths so the
/// 0.1 resolution is exact and frame round-trips compare bit-for-bit.
class Reading {
 public:
  Reading() = default;

  // Throws Error(OutOfRange) outside [-40.0, 80.0] C or [0.0, 100.0] %RH.
  static Reading from_tenths(std::int32_t temperature_tenths, std::int32_t humidity_tenths,
                             std::int64_t timestamp_ms);
  // Quantizes both values first, then range-checks.
  static Reading from_values(double temperature_c, double humidity_rh, std::int64_t timestamp_ms);

  std::int32_t temperature_tenths() const noexcept { return temperature_tenths_; }
  std::int32_t humidity_tenths() const noexcept { return humidity_tenths_; }
  double temperature_c() const noexcept { return temperature_tenths_ / 10.0; }
  double humidity_rh() const noexcept { return humidity_tenths_ / 10.0; }
  std::int64_t timestamp_ms() const noexcept { return timestamp_ms_; }

  friend bool operator==(const Reading&, const Reading&) = default;

 private:
  std::int32_t temperature_tenths_ = 0;
  std::int32_t humidity_tenths_ = 0;
  std::int64_t timestamp_ms_ = 0;
};

/// Five octets: humidity hi/lo, temperature hi/lo (bit 15 = sign), checksum.
using RawFrame = std::array<std::uint8_t, 5>;

std::uint8_t frame_checksum(const RawFrame& frame) noexcept;

RawFrame encode_frame(const Reading& reading);

// Throws Error(ChecksumMismatch) or Error(OutOfRange).
Reading decode_frame(const RawFrame& frame, std::int64_t timestamp_ms);

/// Uppercase, no separators, e.g. "028C00F886".
std::string frame_to_hex(const RawFrame& frame);
// Throws Error(Parse) unless given exactly 10 hex digits (either case).
RawFrame frame_from_hex(std::string_view hex);

enum class ProfileKind { Constant, Diurnal, Replay };

std::string_view to_string(ProfileKind kind) noexcept;
std::optional<ProfileKind> profile_kind_from_string(std::string_view s) noexcept;

/// Stands in for the atmosphere around the simulated sensor.
struct EnvironmentProfile {
  ProfileKind kind = ProfileKind::Constant;
  double base_temperature_c = 20.0;
  double base_humidity_rh = 50.0;
  double amplitude_temperature_c = 0.0;
  double amplitude_humidity_rh = 0.0;
  std::int64_t period_ms = 86'400'000;
  double noise_stddev_temperature = 0.0;
  double noise_stddev_humidity = 0.0;
  std::uint64_t rng_seed = 0;
  std::optional<std::filesystem::path> replay_path;
  // Filled by load_replay(); ground_truth() reads only this.
  std::vector<SeriesPoint> replay_points;

  static EnvironmentProfile constant(double temperature_c, double humidity_rh);
  static EnvironmentProfile diurnal(double base_temperature_c, double base_humidity_rh,
                                    double amplitude_temperature_c, double amplitude_humidity_rh,
                                    std::int64_t period_ms);
  static EnvironmentProfile replay(std::vector<SeriesPoint> points);
  static EnvironmentProfile replay_file(const std::filesystem::path& path);

  // Throws Error(ConfigInvalid) when the kind-specific invariants do not hold.
  void validate() const;
};

struct GroundTruth {
  double temperature_c = 0.0;
  double humidity_rh = 0.0;
};

/// Deterministic in (profile, t_ms): noise is drawn from a generator keyed on
/// the seed and the timestamp, not on call history.
GroundTruth ground_truth(const EnvironmentProfile& profile, std::int64_t t_ms);

struct SensorState {
  EnvironmentProfile profile;
  std::optional<std::int64_t> last_sample_ms;
  std::int64_t min_interval_ms = kMinSampleIntervalMs;

  explicit SensorState(EnvironmentProfile p) : profile(std::move(p)) {}
};

// Throws Error(TooSoon) if fewer than min_interval_ms elapsed since the last
// accepted sample; the state is left untouched in that case.
Reading sample(SensorState& state, std::int64_t now_ms);

}  // namespace envmon::sensor
