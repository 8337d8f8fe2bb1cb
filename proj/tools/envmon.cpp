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

// envmon: operator entry point for the broker, simulated devices, queries,
// sensor-frame utilities and evaluation reports.
//
// Exit codes: 0 ok, 1 domain failure, 2 config/usage, 3 environment, 4 auth.

#include <pthread.h>
#include <signal.h>

#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <stop_token>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "envmon/analytics.hpp"
#include "envmon/broker.hpp"
#include "envmon/broker_server.hpp"
#include "envmon/clock.hpp"
#include "envmon/config.hpp"
#include "envmon/device.hpp"
#include "envmon/error.hpp"
#include "envmon/log.hpp"
#include "envmon/sensor_codec.hpp"
#include "envmon/series_csv.hpp"
#include "envmon/text.hpp"
#include "envmon/transport.hpp"

namespace {

using namespace envmon;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitConfig = 2;
constexpr int kExitEnvironment = 3;
constexpr int kExitAuth = 4;

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::ConfigInvalid:
    case Errc::Parse:
      return kExitConfig;
    case Errc::BindFailure:
    case Errc::Io:
      return kExitEnvironment;
    case Errc::AuthRejected:
      return kExitAuth;
    default:
      return kExitDomain;
  }
}

int fail(const Error& e) {
  std::cerr << "error: " << e.what() << "\n";
  return exit_code_for(e.code());
}

/// SIGINT/SIGTERM turn into a stop request. Must be created before any
/// other thread so the mask is inherited.
class SignalStop {
 public:
  SignalStop() {
    sigemptyset(&set_);
    sigaddset(&set_, SIGINT);
    sigaddset(&set_, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set_, nullptr);
    std::thread([this] {
      int sig = 0;
      sigwait(&set_, &sig);
      source_.request_stop();
    }).detach();
  }

  std::stop_token token() const { return source_.get_token(); }
  std::stop_source& source() { return source_; }

 private:
  sigset_t set_{};
  std::stop_source source_;
};

struct ClockSpec {
  bool simulated = false;
  std::int64_t start_ms = 0;
};

ClockSpec parse_clock(const std::string& s) {
  if (s == "real") return {};
  if (s == "sim") return {true, 0};
  if (s.rfind("sim:", 0) == 0) {
    auto start = text::parse_int64(s.substr(4));
    if (start) return {true, *start};
  }
  throw Error(Errc::ConfigInvalid, "--clock expects real, sim or sim:<start_ms>");
}

// "7s", "500ms", "2m", "1h"; a bare number is seconds.
std::int64_t parse_duration_ms(const std::string& s) {
  std::size_t i = 0;
  while (i < s.size() && ((s[i] >= '0' && s[i] <= '9') || s[i] == '.')) ++i;
  auto number = text::parse_double(s.substr(0, i));
  auto unit = s.substr(i);
  double scale = 0;
  if (unit.empty() || unit == "s") scale = 1000;
  else if (unit == "ms") scale = 1;
  else if (unit == "m") scale = 60'000;
  else if (unit == "h") scale = 3'600'000;
  if (!number || scale == 0 || *number < 0) {
    throw Error(Errc::ConfigInvalid, "bad duration '" + s + "'");
  }
  return static_cast<std::int64_t>(*number * scale);
}

std::unique_ptr<Clock> make_clock(const ClockSpec& spec) {
  if (spec.simulated) return std::make_unique<VirtualClock>(spec.start_ms);
  return std::make_unique<SystemClock>();
}

// ---------------------------------------------------------------- broker

int cmd_broker(const std::string& config_path, const std::string& clock_text, SignalStop& signals) {
  try {
    auto cfg = config::load_station_config(config_path);
    auto clock = make_clock(parse_clock(clock_text));
    auto broker = std::make_shared<broker::Broker>(cfg.broker);
    broker::BrokerServer server(broker, *clock);
    server.start();
    while (!signals.token().stop_requested()) {
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    server.stop();
    return kExitOk;
  } catch (const Error& e) {
    return fail(e);
  }
}

// ---------------------------------------------------------------- device

int cmd_device(const std::string& config_path, const std::vector<std::string>& ids,
               const std::string& duration, const std::string& clock_text, std::int64_t tick_ms,
               SignalStop& signals) {
  config::StationConfig cfg;
  ClockSpec clock_spec;
  std::optional<std::int64_t> duration_ms;
  try {
    cfg = config::load_station_config(config_path);
    clock_spec = parse_clock(clock_text);
    if (!duration.empty()) duration_ms = parse_duration_ms(duration);
    if (tick_ms <= 0) throw Error(Errc::ConfigInvalid, "--tick-ms must be > 0");
  } catch (const Error& e) {
    return fail(e);
  }

  std::vector<const config::DeviceEntry*> entries;
  for (const auto& id : ids) {
    const auto* entry = cfg.find_device(id);
    if (!entry) {
      std::cerr << "error: device '" << id << "' not in " << config_path << "\n";
      return kExitConfig;
    }
    entries.push_back(entry);
  }

  std::atomic<int> worst{kExitOk};
  std::vector<std::jthread> workers;
  for (const auto* entry : entries) {
    workers.emplace_back([&, entry] {
      auto clock = make_clock(clock_spec);
      sensor::SensorState sensor(entry->environment);
      TcpTransport transport;
      device::RunOptions opts;
      opts.tick_ms = tick_ms;
      if (duration_ms) opts.until_ms = clock->now_ms() + *duration_ms;
      opts.on_publish = [&](const sensor::Reading& r) {
        log::event("device_publish", {{"device", entry->device.device_id},
                                      {"t", r.timestamp_ms()},
                                      {"temperature_c", text::format_tenths(r.temperature_tenths())},
                                      {"humidity_rh", text::format_tenths(r.humidity_tenths())}});
      };
      try {
        auto stats = device::run_device(entry->device, sensor, transport, *clock, signals.token(), opts);
        log::event("device_stopped", {{"device", entry->device.device_id},
                                      {"samples", stats.samples},
                                      {"connections", stats.connections}});
      } catch (const Error& e) {
        int code = fail(e);
        int prev = worst.load();
        while (code > prev && !worst.compare_exchange_weak(prev, code)) {
        }
      }
    });
  }
  workers.clear();
  return worst.load();
}

// ---------------------------------------------------------------- query

int cmd_query(const std::string& http_address, const std::string& device_id, int pin,
              const std::vector<std::int64_t>& history, bool list_devices) {
  HostPort hp;
  try {
    hp = parse_host_port(http_address);
  } catch (const Error& e) {
    return fail(e);
  }
  httplib::Client client(hp.host, hp.port);
  client.set_connection_timeout(std::chrono::seconds(5));

  std::string path;
  if (list_devices) {
    path = "/devices";
  } else {
    if (device_id.empty() || pin < 0 || pin > 255) {
      std::cerr << "error: --device and --pin (0-255) are required\n";
      return kExitConfig;
    }
    path = "/devices/" + device_id + "/pins/" + std::to_string(pin);
    if (history.empty()) {
      path += "/latest";
    } else {
      path += "/history?from=" + std::to_string(history[0]) + "&to=" + std::to_string(history[1]);
    }
  }

  auto res = client.Get(path);
  if (!res) {
    std::cerr << "error: cannot reach broker at " << http_address << "\n";
    return kExitEnvironment;
  }
  if (res->status == 404) {
    std::cerr << "not found\n";
    return kExitDomain;
  }
  if (res->status != 200) {
    std::cerr << "error: " << res->body << "\n";
    return kExitDomain;
  }
  if (!list_devices && history.empty()) {
    auto j = json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.contains("value")) {
      std::cerr << "error: unexpected response\n";
      return kExitEnvironment;
    }
    std::cout << j["value"].get<std::string>() << "\n";
  } else {
    std::cout << res->body << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------- codec

int cmd_codec_encode(const std::string& temperature, const std::string& humidity) {
  auto t = text::parse_double(temperature);
  auto h = text::parse_double(humidity);
  if (!t || !h) {
    std::cerr << "error: expected numeric temperature and humidity\n";
    return kExitConfig;
  }
  try {
    auto reading = sensor::Reading::from_values(*t, *h, 0);
    std::cout << sensor::frame_to_hex(sensor::encode_frame(reading)) << "\n";
    return kExitOk;
  } catch (const Error& e) {
    return fail(e);
  }
}

int cmd_codec_decode(const std::string& hex) {
  sensor::RawFrame frame{};
  try {
    frame = sensor::frame_from_hex(hex);
  } catch (const Error& e) {
    return fail(e);
  }
  try {
    auto r = sensor::decode_frame(frame, 0);
    std::cout << text::format_tenths(r.humidity_tenths()) << " %RH "
              << text::format_tenths(r.temperature_tenths()) << " C ok\n";
    return kExitOk;
  } catch (const Error& e) {
    std::cout << to_string(e.code()) << "\n";
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  }
}

// ---------------------------------------------------------------- eval

struct MeasuredSeries {
  std::vector<analytics::TimedValue> temperature;
  std::vector<analytics::TimedValue> humidity;
};

void add_measurement(MeasuredSeries& out, std::uint8_t pin, std::int64_t ts, const std::string& value) {
  auto v = text::parse_double(value);
  if (!v) throw Error(Errc::Parse, "non-numeric history value '" + value + "'");
  if (pin == device::kTemperaturePin) out.temperature.push_back({ts, *v});
  if (pin == device::kHumidityPin) out.humidity.push_back({ts, *v});
}

MeasuredSeries load_measured_file(const std::filesystem::path& path, const std::string& device_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  MeasuredSeries out;
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::string> only_device;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    broker::HistoryEntry e;
    try {
      e = broker::history_entry_from_json_line(line);
    } catch (const Error& err) {
      throw Error(Errc::Parse, path.string() + " line " + std::to_string(line_no) + ": " + err.what());
    }
    if (!device_id.empty() && e.device_id != device_id) continue;
    if (device_id.empty()) {
      if (only_device && *only_device != e.device_id) {
        throw Error(Errc::ConfigInvalid, path.string() + " holds several devices; pass --device");
      }
      only_device = e.device_id;
    }
    add_measurement(out, e.pin, e.timestamp_ms, e.value);
  }
  return out;
}

// A measured series may also be given in the reference CSV layout.
MeasuredSeries load_measured_csv(const std::filesystem::path& path) {
  MeasuredSeries out;
  for (const auto& p : read_series_csv(path)) {
    out.temperature.push_back({p.timestamp_ms, p.temperature_c});
    out.humidity.push_back({p.timestamp_ms, p.humidity_rh});
  }
  return out;
}

MeasuredSeries load_measured_http(const std::string& url, const std::string& device_id) {
  if (device_id.empty()) throw Error(Errc::ConfigInvalid, "--device is required with an HTTP source");
  httplib::Client client(url);
  client.set_connection_timeout(std::chrono::seconds(5));
  MeasuredSeries out;
  for (std::uint8_t pin : {device::kTemperaturePin, device::kHumidityPin}) {
    auto path = "/devices/" + device_id + "/pins/" + std::to_string(pin) + "/history?from=0&to=" +
                std::to_string(std::numeric_limits<std::int64_t>::max());
    auto res = client.Get(path);
    if (!res) throw Error(Errc::Io, "cannot reach " + url);
    if (res->status != 200) throw Error(Errc::NotFound, "history request failed: " + res->body);
    auto j = json::parse(res->body, nullptr, false);
    if (!j.is_array()) throw Error(Errc::Parse, "unexpected history response");
    for (const auto& e : j) add_measurement(out, pin, e.at("ts").get<std::int64_t>(), e.at("value").get<std::string>());
  }
  return out;
}

int cmd_eval(const std::string& reference_path, const std::string& source, const std::string& device_id,
             std::optional<std::int64_t> skew, bool as_json, const std::string& config_path) {
  try {
    config::AnalyticsDefaults defaults;
    if (!config_path.empty()) defaults = config::load_station_config(config_path).analytics;
    auto reference = read_series_csv(reference_path);

    MeasuredSeries measured;
    if (source.rfind("http://", 0) == 0) {
      measured = load_measured_http(source, device_id);
    } else {
      std::filesystem::path p(source);
      if (std::filesystem::is_directory(p)) {
        if (device_id.empty()) throw Error(Errc::ConfigInvalid, "--device is required with a history directory");
        p /= device_id + ".jsonl";
      }
      measured = p.extension() == ".csv" ? load_measured_csv(p) : load_measured_file(p, device_id);
    }

    auto by_ts = [](const analytics::TimedValue& a, const analytics::TimedValue& b) {
      return a.timestamp_ms < b.timestamp_ms;
    };
    std::stable_sort(measured.temperature.begin(), measured.temperature.end(), by_ts);
    std::stable_sort(measured.humidity.begin(), measured.humidity.end(), by_ts);

    auto report = analytics::build_report(reference, measured.temperature, measured.humidity,
                                          skew.value_or(defaults.max_skew_ms), defaults.thresholds);
    if (as_json) {
      std::cout << analytics::to_json(report).dump(2) << "\n";
    } else {
      std::cout << analytics::render_text(report);
    }
    return kExitOk;
  } catch (const Error& e) {
    return fail(e);
  }
}

}  // namespace

int main(int argc, char** argv) {
  SignalStop signals;

  CLI::App app{"envmon - environment monitoring station: broker, simulated devices, tools"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress structured logs on stderr");

  auto* broker_cmd = app.add_subcommand("broker", "Run the broker until interrupted");
  std::string broker_config;
  std::string broker_clock = "real";
  broker_cmd->add_option("-c,--config", broker_config, "Station config file")->required();
  broker_cmd->add_option("--clock", broker_clock, "real | sim | sim:<start_ms>");

  auto* device_cmd = app.add_subcommand("device", "Run simulated devices from the config");
  std::string device_config;
  std::vector<std::string> device_ids;
  std::string device_duration;
  std::string device_clock = "real";
  std::int64_t device_tick_ms = 100;
  device_cmd->add_option("-c,--config", device_config, "Station config file")->required();
  device_cmd->add_option("--id", device_ids, "Device id (repeatable)")->required();
  device_cmd->add_option("--duration", device_duration, "Stop after e.g. 7s, 500ms, 2m");
  device_cmd->add_option("--clock", device_clock, "real | sim | sim:<start_ms>");
  device_cmd->add_option("--tick-ms", device_tick_ms, "Timer granularity");

  auto* query_cmd = app.add_subcommand("query", "Read values from a running broker");
  std::string query_http;
  std::string query_device;
  int query_pin = -1;
  std::vector<std::int64_t> query_history;
  bool query_devices = false;
  query_cmd->add_option("--http", query_http, "Broker HTTP address host:port")->required();
  query_cmd->add_option("--device", query_device, "Device id");
  query_cmd->add_option("--pin", query_pin, "Virtual pin");
  query_cmd->add_option("--history", query_history, "FROM TO (ms, half-open)")->expected(2);
  query_cmd->add_flag("--devices", query_devices, "List known devices");

  auto* codec_cmd = app.add_subcommand("codec", "Sensor frame utilities");
  codec_cmd->require_subcommand(1);
  auto* encode_cmd = codec_cmd->add_subcommand("encode", "TEMP_C HUMIDITY_RH -> 10 hex digits");
  std::string enc_temp;
  std::string enc_hum;
  encode_cmd->add_option("temperature", enc_temp)->required();
  encode_cmd->add_option("humidity", enc_hum)->required();
  auto* decode_cmd = codec_cmd->add_subcommand("decode", "10 hex digits -> reading");
  std::string dec_hex;
  decode_cmd->add_option("frame", dec_hex)->required();

  auto* eval_cmd = app.add_subcommand("eval", "Percentage-error report against a reference CSV");
  std::string eval_reference;
  std::string eval_source;
  std::string eval_device;
  std::optional<std::int64_t> eval_skew;
  bool eval_json = false;
  std::string eval_config;
  eval_cmd->add_option("--reference", eval_reference, "timestamp_ms,temperature_c,humidity_rh CSV")->required();
  eval_cmd->add_option("--history", eval_source, "Measured series: history .jsonl, history directory, .csv, or http://host:port")
      ->required();
  eval_cmd->add_option("--device", eval_device, "Device id");
  eval_cmd->add_option("--skew", eval_skew, "Max pairing skew in ms");
  eval_cmd->add_flag("--json", eval_json, "Emit JSON");
  eval_cmd->add_option("-c,--config", eval_config, "Station config for analytics defaults");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }
  log::set_enabled(!quiet);

  if (*broker_cmd) return cmd_broker(broker_config, broker_clock, signals);
  if (*device_cmd) {
    return cmd_device(device_config, device_ids, device_duration, device_clock, device_tick_ms, signals);
  }
  if (*query_cmd) return cmd_query(query_http, query_device, query_pin, query_history, query_devices);
  if (*codec_cmd) {
    if (*encode_cmd) return cmd_codec_encode(enc_temp, enc_hum);
    return cmd_codec_decode(dec_hex);
  }
  if (*eval_cmd) return cmd_eval(eval_reference, eval_source, eval_device, eval_skew, eval_json, eval_config);
  return kExitConfig;
}
