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

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <stop_token>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "envmon/clock.hpp"
#include "envmon/random.hpp"
#include "envmon/sensor_codec.hpp"
#include "envmon/transport.hpp"
#include "envmon/wire_protocol.hpp"

namespace envmon::device {

inline constexpr std::uint8_t kTemperaturePin = 0;
inline constexpr std::uint8_t kHumidityPin = 1;

struct DeviceConfig {
  std::string device_id;
  std::string auth_token;
  std::string broker_address;
  std::int64_t sample_interval_ms = 2000;
  std::int64_t heartbeat_interval_ms = 10000;
  std::int64_t backoff_base_ms = 1000;
  std::int64_t backoff_cap_ms = 32000;
  // Upper bound of the random extra delay, as a fraction of the backoff.
  double jitter_fraction = 0.1;
  std::uint64_t rng_seed = 0;

  // Throws Error(ConfigInvalid).
  void validate() const;
};

enum class Phase { Disconnected, Connecting, Authenticating, Online, Rejected };

std::string_view to_string(Phase phase) noexcept;

struct DeviceState {
  Phase phase = Phase::Disconnected;
  std::uint16_t next_message_id = 1;
  std::uint32_t consecutive_failures = 0;
  std::optional<std::uint16_t> pending_auth_id;
  std::optional<std::int64_t> last_publish_ms;
  // Time of the last message sent while online; drives the heartbeat.
  std::optional<std::int64_t> last_heartbeat_ms;
  std::int64_t now_ms = 0;
  std::int64_t retry_at_ms = 0;
  std::int64_t phase_since_ms = 0;
  std::uint64_t rng_state = 0;

  static DeviceState initial(const DeviceConfig& config);

  friend bool operator==(const DeviceState&, const DeviceState&) = default;
};

struct TimerTick {
  std::int64_t now_ms = 0;
};
struct ConnectionOpened {};
struct ConnectionClosed {};
struct MessageReceived {
  wire::ProtocolMessage message;
};
/// Completion of a TakeSample action.
struct SampleReady {
  sensor::Reading reading;
};

using DeviceEvent =
    std::variant<TimerTick, ConnectionOpened, ConnectionClosed, MessageReceived, SampleReady>;

struct OpenConnection {
  friend bool operator==(const OpenConnection&, const OpenConnection&) = default;
};
struct Send {
  wire::ProtocolMessage message;
  friend bool operator==(const Send&, const Send&) = default;
};
struct CloseConnection {
  friend bool operator==(const CloseConnection&, const CloseConnection&) = default;
};
struct ScheduleRetry {
  std::int64_t delay_ms = 0;
  friend bool operator==(const ScheduleRetry&, const ScheduleRetry&) = default;
};
struct TakeSample {
  std::int64_t at_ms = 0;
  friend bool operator==(const TakeSample&, const TakeSample&) = default;
};

using DeviceAction = std::variant<OpenConnection, Send, CloseConnection, ScheduleRetry, TakeSample>;

struct StepResult {
  DeviceState state;
  std::vector<DeviceAction> actions;
};

/// The firmware loop as a pure transition function. No I/O, no clocks; the
/// only time source is TimerTick, the only randomness is state.rng_state.
StepResult step(DeviceState state, const DeviceConfig& config, const DeviceEvent& event);

/// min(base * 2^(failures-1), cap) plus uniform jitter in [0, jitter_fraction]
/// of that value. `failures` must be >= 1.
std::int64_t next_backoff(std::uint32_t failures, const DeviceConfig& config, SplitMix64& rng);

struct RunOptions {
  // Granularity of TimerTick events.
  std::int64_t tick_ms = 100;
  // Real time to block for a LOGIN reply per tick; lets a virtual-clock device
  // talk to a broker that runs in real time.
  std::chrono::milliseconds auth_wait{200};
  // Stop once the clock reaches this time.
  std::optional<std::int64_t> until_ms;
  // Called after each sample is published.
  std::function<void(const sensor::Reading&)> on_publish;
};

struct RunStats {
  std::uint64_t samples = 0;
  std::uint64_t messages_sent = 0;
  std::uint64_t connections = 0;
  std::uint64_t disconnects = 0;
};

/// Drives step() against a real transport and sensor. One instance per
/// device, used from one thread.
class DeviceRunner {
 public:
  DeviceRunner(DeviceConfig config, sensor::SensorState& sensor, Transport& transport, Clock& clock);

  // One iteration at clock.now_ms(): drain input, tick, execute actions.
  // Throws Error(AuthRejected) once the broker refused the token.
  void poll(std::chrono::milliseconds receive_wait = std::chrono::milliseconds{0});

  const DeviceState& state() const noexcept { return state_; }
  const RunStats& stats() const noexcept { return stats_; }
  const DeviceConfig& config() const noexcept { return config_; }
  // Every action emitted so far, in order. Useful for replay checks.
  const std::vector<DeviceAction>& action_log() const noexcept { return action_log_; }
  void set_record_actions(bool on) noexcept { record_actions_ = on; }
  void set_on_publish(std::function<void(const sensor::Reading&)> fn) { on_publish_ = std::move(fn); }

  // Closes the transport without treating it as a failure.
  void shutdown();

 private:
  void dispatch(const DeviceEvent& event);
  void execute(const DeviceAction& action);

  DeviceConfig config_;
  sensor::SensorState& sensor_;
  Transport& transport_;
  Clock& clock_;
  DeviceState state_;
  wire::StreamDecoder decoder_;
  RunStats stats_;
  std::vector<DeviceAction> action_log_;
  bool record_actions_ = false;
  std::function<void(const sensor::Reading&)> on_publish_;
};

/// Runs until the stop token fires or options.until_ms is reached.
/// Throws Error(AuthRejected); every other failure is retried.
RunStats run_device(const DeviceConfig& config, sensor::SensorState& sensor, Transport& transport,
                    Clock& clock, std::stop_token stop, const RunOptions& options = {});

}  // namespace envmon::device
