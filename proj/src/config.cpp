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

#include "envmon/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "envmon/error.hpp"

namespace envmon::config {

using nlohmann::json;

namespace {

[[noreturn]] void field_error(const std::string& path, const std::string& msg) {
  throw Error(Errc::ConfigInvalid, "field " + path + ": " + msg);
}

/// Typed access to one JSON object with the dotted path kept for messages.
/// Keys not read by the end of parsing are reported as unknown.
class Fields {
 public:
  Fields(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) field_error(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string child(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  bool has(std::string_view key) const { return obj_.contains(key); }

  const json& at(std::string_view key) {
    seen_.insert(std::string(key));
    auto it = obj_.find(key);
    if (it == obj_.end()) field_error(child(key), "required field missing");
    return *it;
  }

  template <class T>
  T get(std::string_view key) {
    const auto& v = at(key);
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      field_error(child(key), std::string("wrong type (") + v.type_name() + ")");
    }
  }

  template <class T>
  T get_or(std::string_view key, T fallback) {
    if (!has(key)) {
      seen_.insert(std::string(key));
      return fallback;
    }
    return get<T>(key);
  }

  void reject_unknown() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) field_error(child(it.key()), "unknown field");
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string, std::less<>> seen_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

broker::BrokerConfig parse_broker(const json& j, const std::filesystem::path& base) {
  Fields f(j, "broker");
  broker::BrokerConfig b;
  b.listen_address = f.get_or<std::string>("listen_address", b.listen_address);
  b.http_listen_address = f.get_or<std::string>("http_listen_address", b.http_listen_address);
  b.history_path = resolve(base, f.get_or<std::string>("history_path", b.history_path.string()));
  b.heartbeat_timeout_ms = f.get_or<std::int64_t>("heartbeat_timeout_ms", b.heartbeat_timeout_ms);
  b.token_table = f.get<std::map<std::string, std::string>>("token_table");
  f.reject_unknown();
  try {
    b.validate();
  } catch (const Error& e) {
    field_error("broker", e.what());
  }
  return b;
}

sensor::EnvironmentProfile parse_environment(const json& j, const std::string& path,
                                             const std::filesystem::path& base) {
  Fields f(j, path);
  auto kind_text = f.get<std::string>("kind");
  auto kind = sensor::profile_kind_from_string(kind_text);
  if (!kind) field_error(f.child("kind"), "expected constant, diurnal or replay");

  sensor::EnvironmentProfile p;
  p.kind = *kind;
  p.base_temperature_c = f.get_or<double>("base_temperature_c", p.base_temperature_c);
  p.base_humidity_rh = f.get_or<double>("base_humidity_rh", p.base_humidity_rh);
  p.amplitude_temperature_c = f.get_or<double>("amplitude_temperature_c", p.amplitude_temperature_c);
  p.amplitude_humidity_rh = f.get_or<double>("amplitude_humidity_rh", p.amplitude_humidity_rh);
  p.period_ms = f.get_or<std::int64_t>("period_ms", p.period_ms);
  p.noise_stddev_temperature = f.get_or<double>("noise_stddev_temperature", 0.0);
  p.noise_stddev_humidity = f.get_or<double>("noise_stddev_humidity", 0.0);
  p.rng_seed = f.get_or<std::uint64_t>("rng_seed", 0);
  if (f.has("replay_path")) {
    auto replay_path = resolve(base, f.get<std::string>("replay_path"));
    if (p.kind == sensor::ProfileKind::Replay) {
      try {
        p.replay_points = read_series_csv(replay_path);
      } catch (const Error& e) {
        field_error(f.child("replay_path"), e.what());
      }
    }
    p.replay_path = replay_path;
  }
  f.reject_unknown();
  try {
    p.validate();
  } catch (const Error& e) {
    field_error(path, e.what());
  }
  return p;
}

DeviceEntry parse_device(const json& j, const std::string& path, const std::filesystem::path& base) {
  Fields f(j, path);
  DeviceEntry e;
  auto& d = e.device;
  d.device_id = f.get<std::string>("device_id");
  d.auth_token = f.get<std::string>("auth_token");
  d.broker_address = f.get<std::string>("broker_address");
  d.sample_interval_ms = f.get_or<std::int64_t>("sample_interval_ms", d.sample_interval_ms);
  d.heartbeat_interval_ms = f.get_or<std::int64_t>("heartbeat_interval_ms", d.heartbeat_interval_ms);
  d.backoff_base_ms = f.get_or<std::int64_t>("backoff_base_ms", d.backoff_base_ms);
  d.backoff_cap_ms = f.get_or<std::int64_t>("backoff_cap_ms", d.backoff_cap_ms);
  d.jitter_fraction = f.get_or<double>("jitter_fraction", d.jitter_fraction);
  d.rng_seed = f.get_or<std::uint64_t>("rng_seed", d.rng_seed);
  e.environment = f.has("environment")
                      ? parse_environment(f.at("environment"), f.child("environment"), base)
                      : sensor::EnvironmentProfile{};
  f.reject_unknown();
  try {
    d.validate();
  } catch (const Error& err) {
    field_error(path, err.what());
  }
  return e;
}

AnalyticsDefaults parse_analytics(const json& j) {
  Fields f(j, "analytics");
  AnalyticsDefaults a;
  a.thresholds.partly_cloudy_rh = f.get_or<double>("partly_cloudy_rh", a.thresholds.partly_cloudy_rh);
  a.thresholds.cloudy_rh = f.get_or<double>("cloudy_rh", a.thresholds.cloudy_rh);
  a.max_skew_ms = f.get_or<std::int64_t>("max_skew_ms", a.max_skew_ms);
  f.reject_unknown();
  if (!(a.thresholds.partly_cloudy_rh <= a.thresholds.cloudy_rh)) {
    field_error("analytics", "partly_cloudy_rh must be <= cloudy_rh");
  }
  if (a.max_skew_ms < 0) field_error("analytics.max_skew_ms", "must be >= 0");
  return a;
}

std::string line_col(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + " column " + std::to_string(col);
}

}  // namespace

const DeviceEntry* StationConfig::find_device(std::string_view device_id) const noexcept {
  for (const auto& d : devices) {
    if (d.device.device_id == device_id) return &d;
  }
  return nullptr;
}

StationConfig parse_station_config(std::string_view text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    // e.byte is 1-based and points one past the offending character.
    throw Error(Errc::ConfigInvalid, line_col(text, e.byte > 0 ? e.byte - 1 : 0) + ": syntax error");
  }

  Fields f(root, "");
  StationConfig cfg;
  cfg.broker = parse_broker(f.at("broker"), base_dir);

  const auto& devices = f.get_or<json>("devices", json::array());
  if (!devices.is_array()) field_error("devices", "expected an array");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < devices.size(); ++i) {
    auto path = "devices[" + std::to_string(i) + "]";
    auto entry = parse_device(devices[i], path, base_dir);
    if (!ids.insert(entry.device.device_id).second) {
      field_error(path + ".device_id", "duplicate device id '" + entry.device.device_id + "'");
    }
    auto tok = cfg.broker.token_table.find(entry.device.auth_token);
    if (tok == cfg.broker.token_table.end()) {
      field_error(path + ".auth_token", "token not present in broker.token_table");
    }
    if (tok->second != entry.device.device_id) {
      field_error(path + ".auth_token",
                  "token belongs to device '" + tok->second + "', not '" + entry.device.device_id + "'");
    }
    cfg.devices.push_back(std::move(entry));
  }

  if (f.has("analytics")) cfg.analytics = parse_analytics(f.at("analytics"));
  f.reject_unknown();
  return cfg;
}

StationConfig load_station_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::ConfigInvalid, "cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_station_config(ss.str(), path.parent_path());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace envmon::config
