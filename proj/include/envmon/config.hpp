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
#include <string_view>
#include <vector>

#include "envmon/analytics.hpp"
#include "envmon/broker.hpp"
#include "envmon/device.hpp"
#include "envmon/sensor_codec.hpp"

namespace envmon::config {

struct DeviceEntry {
  device::DeviceConfig device;
  sensor::EnvironmentProfile environment;
};

struct AnalyticsDefaults {
  analytics::ClarityThresholds thresholds;
  std::int64_t max_skew_ms = 60000;
};

/// The single file that describes a station: the broker, the simulated
/// devices with their environments, and evaluation defaults.
struct StationConfig {
  broker::BrokerConfig broker;
  std::vector<DeviceEntry> devices;
  AnalyticsDefaults analytics;

  const DeviceEntry* find_device(std::string_view device_id) const noexcept;
};

/// Parses the JSON station file. Relative paths inside it resolve against
/// `base_dir`. Throws Error(ConfigInvalid) whose message names the line and
/// column (syntax errors) or the dotted field path (schema errors).
StationConfig parse_station_config(std::string_view text, const std::filesystem::path& base_dir = {});
StationConfig load_station_config(const std::filesystem::path& path);

}  // namespace envmon::config
