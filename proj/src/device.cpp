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

#include "envmon/device.hpp"

#include <algorithm>

#include "envmon/error.hpp"
#include "envmon/log.hpp"
#include "envmon/text.hpp"

namespace envmon::device {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::uint16_t take_message_id(DeviceState& s) noexcept {
  auto id = s.next_message_id;
  s.next_message_id = id == 0xFFFF ? 1 : static_cast<std::uint16_t>(id + 1);
  return id;
}

void enter(DeviceState& s, Phase phase) noexcept {
  s.phase = phase;
  s.phase_since_ms = s.now_ms;
}

// Any failure before or after authentication folds into a backoff retry.
void fail(DeviceState& s, const DeviceConfig& config, std::vector<DeviceAction>& actions) {
  enter(s, Phase::Disconnected);
  s.pending_auth_id.reset();
  s.consecutive_failures += 1;
  SplitMix64 rng(s.rng_state);
  auto delay = next_backoff(s.consecutive_failures, config, rng);
  s.rng_state = rng.state();
  s.retry_at_ms = s.now_ms + delay;
  actions.emplace_back(ScheduleRetry{delay});
}

void send(DeviceState& s, std::vector<DeviceAction>& actions, wire::ProtocolMessage msg) {
  actions.emplace_back(Send{std::move(msg)});
  if (s.phase == Phase::Online) s.last_heartbeat_ms = s.now_ms;
}

void on_tick(DeviceState& s, const DeviceConfig& config, std::vector<DeviceAction>& actions) {
  // A handshake that hangs for a whole heartbeat period counts as a failure.
  const auto handshake_timeout = config.heartbeat_interval_ms;

  switch (s.phase) {
    case Phase::Disconnected:
      if (s.now_ms >= s.retry_at_ms) {
        enter(s, Phase::Connecting);
        actions.emplace_back(OpenConnection{});
      }
      break;
    case Phase::Connecting:
      if (s.now_ms - s.phase_since_ms >= handshake_timeout) fail(s, config, actions);
      break;
    case Phase::Authenticating:
      if (s.now_ms - s.phase_since_ms >= handshake_timeout) {
        actions.emplace_back(CloseConnection{});
        fail(s, config, actions);
      }
      break;
    case Phase::Online:
      if (!s.last_publish_ms || s.now_ms - *s.last_publish_ms >= config.sample_interval_ms) {
        s.last_publish_ms = s.now_ms;
        actions.emplace_back(TakeSample{s.now_ms});
      } else if (!s.last_heartbeat_ms ||
                 s.now_ms - *s.last_heartbeat_ms >= config.heartbeat_interval_ms) {
        send(s, actions, wire::make_ping(take_message_id(s)));
      }
      break;
    case Phase::Rejected:
      break;
  }
}

void on_message(DeviceState& s, const DeviceConfig& config, const wire::ProtocolMessage& msg,
                std::vector<DeviceAction>& actions) {
  if (msg.command != wire::Command::Rsp) return;
  auto status = wire::response_status(msg);

  if (s.phase == Phase::Authenticating && s.pending_auth_id == msg.message_id) {
    s.pending_auth_id.reset();
    if (status == static_cast<std::uint16_t>(wire::StatusCode::Ok)) {
      enter(s, Phase::Online);
      s.consecutive_failures = 0;
      s.last_heartbeat_ms = s.now_ms;
    } else if (status == static_cast<std::uint16_t>(wire::StatusCode::InvalidToken)) {
      actions.emplace_back(CloseConnection{});
      enter(s, Phase::Rejected);
    } else {
      actions.emplace_back(CloseConnection{});
      fail(s, config, actions);
    }
    return;
  }

  if (s.phase == Phase::Online &&
      status == static_cast<std::uint16_t>(wire::StatusCode::IllegalCommand)) {
    actions.emplace_back(CloseConnection{});
    fail(s, config, actions);
  }
}

void on_sample(DeviceState& s, const sensor::Reading& reading, std::vector<DeviceAction>& actions) {
  if (s.phase != Phase::Online) return;
  // V0 before V1, always.
  send(s, actions,
       wire::make_hardware_write(take_message_id(s), kTemperaturePin,
                                 text::format_tenths(reading.temperature_tenths())));
  send(s, actions,
       wire::make_hardware_write(take_message_id(s), kHumidityPin,
                                 text::format_tenths(reading.humidity_tenths())));
}

}  // namespace

void DeviceConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(Errc::ConfigInvalid, what); };
  if (device_id.empty()) bad("device_id must not be empty");
  if (auth_token.empty()) bad("auth_token must not be empty");
  if (sample_interval_ms < sensor::kMinSampleIntervalMs) bad("sample_interval_ms must be >= 2000");
  if (heartbeat_interval_ms <= 0) bad("heartbeat_interval_ms must be > 0");
  if (backoff_base_ms <= 0) bad("backoff_base_ms must be > 0");
  if (backoff_base_ms > backoff_cap_ms) bad("backoff_base_ms must be <= backoff_cap_ms");
  if (jitter_fraction < 0.0 || jitter_fraction > 1.0) bad("jitter_fraction must be in [0, 1]");
}

std::string_view to_string(Phase phase) noexcept {
  switch (phase) {
    case Phase::Disconnected: return "disconnected";
    case Phase::Connecting: return "connecting";
    case Phase::Authenticating: return "authenticating";
    case Phase::Online: return "online";
    case Phase::Rejected: return "rejected";
  }
  return "?";
}

DeviceState DeviceState::initial(const DeviceConfig& config) {
  DeviceState s;
  s.rng_state = mix_seed(config.rng_seed, 0x6261636B'6F6666ULL);
  return s;
}

std::int64_t next_backoff(std::uint32_t failures, const DeviceConfig& config, SplitMix64& rng) {
  failures = std::max<std::uint32_t>(failures, 1);
  std::int64_t delay = config.backoff_cap_ms;
  // Past 2^40 the product is far above any sane cap; avoid the overflow.
  if (failures - 1 < 40) {
    delay = std::min(config.backoff_base_ms << (failures - 1), config.backoff_cap_ms);
  }
  auto span = static_cast<std::int64_t>(static_cast<double>(delay) * config.jitter_fraction);
  if (span > 0) delay += static_cast<std::int64_t>(rng.next() % static_cast<std::uint64_t>(span + 1));
  return delay;
}

StepResult step(DeviceState state, const DeviceConfig& config, const DeviceEvent& event) {
  std::vector<DeviceAction> actions;
  std::visit(overloaded{
                 [&](const TimerTick& tick) {
                   state.now_ms = std::max(state.now_ms, tick.now_ms);
                   on_tick(state, config, actions);
                 },
                 [&](const ConnectionOpened&) {
                   if (state.phase != Phase::Connecting) return;
                   auto id = take_message_id(state);
                   state.pending_auth_id = id;
                   enter(state, Phase::Authenticating);
                   actions.emplace_back(Send{wire::make_login(id, config.auth_token)});
                 },
                 [&](const ConnectionClosed&) {
                   if (state.phase == Phase::Disconnected || state.phase == Phase::Rejected) return;
                   fail(state, config, actions);
                 },
                 [&](const MessageReceived& m) { on_message(state, config, m.message, actions); },
                 [&](const SampleReady& r) { on_sample(state, r.reading, actions); },
             },
             event);
  return {std::move(state), std::move(actions)};
}

DeviceRunner::DeviceRunner(DeviceConfig config, sensor::SensorState& sensor, Transport& transport,
                           Clock& clock)
    : config_(std::move(config)),
      sensor_(sensor),
      transport_(transport),
      clock_(clock),
      state_(DeviceState::initial(config_)) {}

void DeviceRunner::poll(std::chrono::milliseconds receive_wait) {
  if (transport_.is_open() && state_.phase != Phase::Disconnected) {
    auto data = transport_.receive(state_.phase == Phase::Authenticating ? receive_wait
                                                                         : std::chrono::milliseconds{0});
    if (!data) {
      transport_.close();
      dispatch(ConnectionClosed{});
    } else if (!data->empty()) {
      std::vector<wire::ProtocolMessage> messages;
      try {
        messages = decoder_.feed(*data);
      } catch (const Error& e) {
        log::event("device_protocol_error", {{"device", config_.device_id}, {"error", e.what()}});
        transport_.close();
        dispatch(ConnectionClosed{});
      }
      for (auto& msg : messages) dispatch(MessageReceived{std::move(msg)});
    }
  }
  dispatch(TimerTick{clock_.now_ms()});
}

void DeviceRunner::shutdown() {
  transport_.close();
  decoder_ = {};
}

void DeviceRunner::dispatch(const DeviceEvent& event) {
  auto before = state_.phase;
  auto result = step(state_, config_, event);
  state_ = std::move(result.state);
  if (state_.phase != before) {
    log::event("device_phase", {{"device", config_.device_id},
                                {"from", to_string(before)},
                                {"to", to_string(state_.phase)},
                                {"t", state_.now_ms}});
  }
  for (const auto& action : result.actions) {
    if (record_actions_) action_log_.push_back(action);
    execute(action);
  }
  if (state_.phase == Phase::Rejected && before != Phase::Rejected) {
    transport_.close();
    throw Error(Errc::AuthRejected, "broker rejected the token for device " + config_.device_id);
  }
}

void DeviceRunner::execute(const DeviceAction& action) {
  std::visit(
      overloaded{
          [&](const OpenConnection&) {
            decoder_ = {};
            if (transport_.open(config_.broker_address)) {
              stats_.connections += 1;
              dispatch(ConnectionOpened{});
            } else {
              dispatch(ConnectionClosed{});
            }
          },
          [&](const Send& s) {
            if (!transport_.is_open()) return;
            auto octets = wire::encode_message(s.message);
            if (!transport_.send(octets)) {
              transport_.close();
              dispatch(ConnectionClosed{});
              return;
            }
            stats_.messages_sent += 1;
          },
          [&](const CloseConnection&) {
            transport_.close();
            decoder_ = {};
          },
          [&](const ScheduleRetry& r) {
            stats_.disconnects += 1;
            log::event("device_retry", {{"device", config_.device_id},
                                        {"delay_ms", r.delay_ms},
                                        {"failures", state_.consecutive_failures}});
          },
          [&](const TakeSample& t) {
            try {
              auto reading = sensor::sample(sensor_, t.at_ms);
              // Run the reading through the sensor frame format, as the MCU would.
              auto frame = sensor::encode_frame(reading);
              auto decoded = sensor::decode_frame(frame, t.at_ms);
              stats_.samples += 1;
              dispatch(SampleReady{decoded});
              if (on_publish_) on_publish_(decoded);
            } catch (const Error& e) {
              if (e.code() == Errc::AuthRejected) throw;
              log::event("device_sample_failed", {{"device", config_.device_id}, {"error", e.what()}});
            }
          },
      },
      action);
}

RunStats run_device(const DeviceConfig& config, sensor::SensorState& sensor, Transport& transport,
                    Clock& clock, std::stop_token stop, const RunOptions& options) {
  DeviceRunner runner(config, sensor, transport, clock);
  runner.set_on_publish(options.on_publish);
  while (!stop.stop_requested()) {
    auto now = clock.now_ms();
    if (options.until_ms && now >= *options.until_ms) break;
    try {
      runner.poll(options.auth_wait);
    } catch (...) {
      runner.shutdown();
      throw;
    }
    auto next = now + options.tick_ms;
    if (options.until_ms) next = std::min(next, *options.until_ms);
    clock.sleep_until_ms(next);
  }
  runner.shutdown();
  return runner.stats();
}

}  // namespace envmon::device
