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

#include "envmon/sensor_codec.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "envmon/error.hpp"
#include "envmon/random.hpp"

namespace envmon::sensor {

namespace {

constexpr std::uint16_t kSignBit = 0x8000;
constexpr std::uint16_t kMagnitudeMask = 0x7FFF;

std::string describe_tenths(std::int64_t tenths) {
  return std::to_string(tenths / 10) + "." + std::to_string(std::abs(tenths % 10));
}

void check_range(std::int64_t temperature_tenths, std::int64_t humidity_tenths) {
  if (temperature_tenths < kMinTemperatureTenths || temperature_tenths > kMaxTemperatureTenths) {
    throw Error(Errc::OutOfRange,
                "temperature " + describe_tenths(temperature_tenths) + " C outside [-40.0, 80.0]");
  }
  if (humidity_tenths < kMinHumidityTenths || humidity_tenths > kMaxHumidityTenths) {
    throw Error(Errc::OutOfRange,
                "humidity " + describe_tenths(humidity_tenths) + " %RH outside [0.0, 100.0]");
  }
}

int hex_value(char c) noexcept {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}

// Distinct noise streams per channel at the same timestamp.
constexpr std::uint64_t kTemperatureStream = 0x7465'6D70;
constexpr std::uint64_t kHumidityStream = 0x6875'6D69;

double channel_noise(std::uint64_t seed, std::int64_t t_ms, std::uint64_t stream) {
  SplitMix64 g(mix_seed(mix_seed(seed, static_cast<std::uint64_t>(t_ms)), stream));
  return g.gaussian();
}

GroundTruth interpolate(const std::vector<SeriesPoint>& points, std::int64_t t_ms) {
  if (points.empty() || t_ms < points.front().timestamp_ms || t_ms > points.back().timestamp_ms) {
    throw Error(Errc::ReplayExhausted, "t=" + std::to_string(t_ms) + " outside replay span");
  }
  auto hi = std::lower_bound(points.begin(), points.end(), t_ms,
                             [](const SeriesPoint& p, std::int64_t t) { return p.timestamp_ms < t; });
  if (hi->timestamp_ms == t_ms) return {hi->temperature_c, hi->humidity_rh};
  auto lo = std::prev(hi);
  double frac = static_cast<double>(t_ms - lo->timestamp_ms) /
                static_cast<double>(hi->timestamp_ms - lo->timestamp_ms);
  return {lo->temperature_c + frac * (hi->temperature_c - lo->temperature_c),
          lo->humidity_rh + frac * (hi->humidity_rh - lo->humidity_rh)};
}

}  // namespace

std::int64_t quantize_tenths(double value) noexcept {
  // Saturate well inside int64 so the cast below is always defined.
  constexpr double kLimit = 1e15;
  if (std::isnan(value)) return 0;
  double scaled = std::clamp(value * 10.0, -kLimit, kLimit);
  return static_cast<std::int64_t>(std::round(scaled));
}

Reading Reading::from_tenths(std::int32_t temperature_tenths, std::int32_t humidity_tenths,
                             std::int64_t timestamp_ms) {
  check_range(temperature_tenths, humidity_tenths);
  Reading r;
  r.temperature_tenths_ = temperature_tenths;
  r.humidity_tenths_ = humidity_tenths;
  r.timestamp_ms_ = timestamp_ms;
  return r;
}

Reading Reading::from_values(double temperature_c, double humidity_rh, std::int64_t timestamp_ms) {
  if (!std::isfinite(temperature_c) || !std::isfinite(humidity_rh)) {
    throw Error(Errc::OutOfRange, "non-finite reading");
  }
  auto t = quantize_tenths(temperature_c);
  auto h = quantize_tenths(humidity_rh);
  check_range(t, h);
  return from_tenths(static_cast<std::int32_t>(t), static_cast<std::int32_t>(h), timestamp_ms);
}

std::uint8_t frame_checksum(const RawFrame& frame) noexcept {
  unsigned sum = 0;
  for (std::size_t i = 0; i < 4; ++i) sum += frame[i];
  return static_cast<std::uint8_t>(sum & 0xFF);
}

RawFrame encode_frame(const Reading& reading) {
  check_range(reading.temperature_tenths(), reading.humidity_tenths());

  auto humidity_word = static_cast<std::uint16_t>(reading.humidity_tenths());
  auto magnitude = static_cast<std::uint16_t>(std::abs(reading.temperature_tenths()));
  std::uint16_t temperature_word = magnitude;
  if (reading.temperature_tenths() < 0) temperature_word |= kSignBit;

  RawFrame frame{
      static_cast<std::uint8_t>(humidity_word >> 8),
      static_cast<std::uint8_t>(humidity_word & 0xFF),
      static_cast<std::uint8_t>(temperature_word >> 8),
      static_cast<std::uint8_t>(temperature_word & 0xFF),
      0,
  };
  frame[4] = frame_checksum(frame);
  return frame;
}

Reading decode_frame(const RawFrame& frame, std::int64_t timestamp_ms) {
  if (frame_checksum(frame) != frame[4]) {
    throw Error(Errc::ChecksumMismatch, "checksum mismatch");
  }
  std::uint16_t humidity_word = static_cast<std::uint16_t>((frame[0] << 8) | frame[1]);
  std::uint16_t temperature_word = static_cast<std::uint16_t>((frame[2] << 8) | frame[3]);

  std::int32_t magnitude = temperature_word & kMagnitudeMask;
  if (humidity_word > kMaxHumidityTenths) {
    throw Error(Errc::OutOfRange, "humidity word " + std::to_string(humidity_word) + " > 1000");
  }
  if (magnitude > kMaxTemperatureTenths) {
    throw Error(Errc::OutOfRange, "temperature magnitude " + std::to_string(magnitude) + " > 800");
  }
  std::int32_t temperature = (temperature_word & kSignBit) ? -magnitude : magnitude;
  // A negative magnitude above 40.0 is a valid frame word but not a valid reading.
  return Reading::from_tenths(temperature, humidity_word, timestamp_ms);
}

std::string frame_to_hex(const RawFrame& frame) {
  static constexpr char digits[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(10);
  for (auto octet : frame) {
    out.push_back(digits[octet >> 4]);
    out.push_back(digits[octet & 0x0F]);
  }
  return out;
}

RawFrame frame_from_hex(std::string_view hex) {
  if (hex.size() != 10) {
    throw Error(Errc::Parse, "frame must be exactly 10 hex digits");
  }
  RawFrame frame{};
  for (std::size_t i = 0; i < 5; ++i) {
    int hi = hex_value(hex[2 * i]);
    int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw Error(Errc::Parse, "invalid hex digit in frame");
    frame[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return frame;
}

std::string_view to_string(ProfileKind kind) noexcept {
  switch (kind) {
    case ProfileKind::Constant: return "constant";
    case ProfileKind::Diurnal: return "diurnal";
    case ProfileKind::Replay: return "replay";
  }
  return "unknown";
}

std::optional<ProfileKind> profile_kind_from_string(std::string_view s) noexcept {
  if (s == "constant") return ProfileKind::Constant;
  if (s == "diurnal") return ProfileKind::Diurnal;
  if (s == "replay") return ProfileKind::Replay;
  return std::nullopt;
}

EnvironmentProfile EnvironmentProfile::constant(double temperature_c, double humidity_rh) {
  EnvironmentProfile p;
  p.kind = ProfileKind::Constant;
  p.base_temperature_c = temperature_c;
  p.base_humidity_rh = humidity_rh;
  return p;
}

EnvironmentProfile EnvironmentProfile::diurnal(double base_temperature_c, double base_humidity_rh,
                                               double amplitude_temperature_c,
                                               double amplitude_humidity_rh, std::int64_t period_ms) {
  EnvironmentProfile p;
  p.kind = ProfileKind::Diurnal;
  p.base_temperature_c = base_temperature_c;
  p.base_humidity_rh = base_humidity_rh;
  p.amplitude_temperature_c = amplitude_temperature_c;
  p.amplitude_humidity_rh = amplitude_humidity_rh;
  p.period_ms = period_ms;
  return p;
}

EnvironmentProfile EnvironmentProfile::replay(std::vector<SeriesPoint> points) {
  EnvironmentProfile p;
  p.kind = ProfileKind::Replay;
  p.replay_path = std::filesystem::path{};
  p.replay_points = std::move(points);
  return p;
}

EnvironmentProfile EnvironmentProfile::replay_file(const std::filesystem::path& path) {
  auto p = replay(read_series_csv(path));
  p.replay_path = path;
  return p;
}

void EnvironmentProfile::validate() const {
  if (kind == ProfileKind::Diurnal && period_ms <= 0) {
    throw Error(Errc::ConfigInvalid, "period_ms must be > 0 for a diurnal profile");
  }
  if ((kind == ProfileKind::Replay) != replay_path.has_value()) {
    throw Error(Errc::ConfigInvalid, "replay_path must be set iff kind is replay");
  }
  if (kind == ProfileKind::Replay && replay_points.empty()) {
    throw Error(Errc::ConfigInvalid, "replay profile has no points");
  }
  if (noise_stddev_temperature < 0.0 || noise_stddev_humidity < 0.0) {
    throw Error(Errc::ConfigInvalid, "noise standard deviations must be >= 0");
  }
}

GroundTruth ground_truth(const EnvironmentProfile& profile, std::int64_t t_ms) {
  GroundTruth g;
  switch (profile.kind) {
    case ProfileKind::Constant:
      g = {profile.base_temperature_c, profile.base_humidity_rh};
      break;
    case ProfileKind::Diurnal: {
      // Reduce t modulo the period first so large epoch timestamps keep precision.
      auto phase_ms = t_ms % profile.period_ms;
      double s = std::sin(2.0 * std::numbers::pi * static_cast<double>(phase_ms) /
                          static_cast<double>(profile.period_ms));
      g = {profile.base_temperature_c + profile.amplitude_temperature_c * s,
           profile.base_humidity_rh + profile.amplitude_humidity_rh * s};
      break;
    }
    case ProfileKind::Replay:
      g = interpolate(profile.replay_points, t_ms);
      break;
  }
  if (profile.noise_stddev_temperature > 0.0) {
    g.temperature_c +=
        profile.noise_stddev_temperature * channel_noise(profile.rng_seed, t_ms, kTemperatureStream);
  }
  if (profile.noise_stddev_humidity > 0.0) {
    g.humidity_rh +=
        profile.noise_stddev_humidity * channel_noise(profile.rng_seed, t_ms, kHumidityStream);
  }
  return g;
}

Reading sample(SensorState& state, std::int64_t now_ms) {
  if (state.last_sample_ms && now_ms - *state.last_sample_ms < state.min_interval_ms) {
    throw Error(Errc::TooSoon, "sensor needs " + std::to_string(state.min_interval_ms) +
                                   " ms between samples");
  }
  auto truth = ground_truth(state.profile, now_ms);
  auto t = std::clamp<std::int64_t>(quantize_tenths(truth.temperature_c), kMinTemperatureTenths,
                                    kMaxTemperatureTenths);
  auto h = std::clamp<std::int64_t>(quantize_tenths(truth.humidity_rh), kMinHumidityTenths,
                                    kMaxHumidityTenths);
  auto reading =
      Reading::from_tenths(static_cast<std::int32_t>(t), static_cast<std::int32_t>(h), now_ms);
  state.last_sample_ms = now_ms;
  return reading;
}

}  // namespace envmon::sensor
