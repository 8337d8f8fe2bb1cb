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

#include "envmon/broker.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "envmon/error.hpp"
#include "envmon/log.hpp"

namespace envmon::broker {

using nlohmann::json;

bool is_valid_device_id(std::string_view id) noexcept {
  if (id.empty() || id.size() > 128 || id == "." || id == "..") return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
           c == '-' || c == '.';
  });
}

void BrokerConfig::validate() const {
  std::set<std::string> ids;
  for (const auto& [token, id] : token_table) {
    if (token.empty()) throw Error(Errc::ConfigInvalid, "empty auth token in token table");
    if (!is_valid_device_id(id)) {
      throw Error(Errc::ConfigInvalid, "device id '" + id + "' must match [A-Za-z0-9_.-]+");
    }
    if (!ids.insert(id).second) {
      throw Error(Errc::ConfigInvalid, "device id '" + id + "' appears under two tokens");
    }
  }
  if (heartbeat_timeout_ms <= 0) throw Error(Errc::ConfigInvalid, "heartbeat_timeout_ms must be > 0");
  if (history_path.empty()) throw Error(Errc::ConfigInvalid, "history_path must be set");
}

std::string history_entry_to_json_line(const HistoryEntry& entry) {
  json j = {{"ts", entry.timestamp_ms}, {"device", entry.device_id}, {"pin", entry.pin}, {"value", entry.value}};
  return j.dump();
}

HistoryEntry history_entry_from_json_line(std::string_view line) {
  try {
    auto j = json::parse(line);
    HistoryEntry e;
    e.timestamp_ms = j.at("ts").get<std::int64_t>();
    e.device_id = j.at("device").get<std::string>();
    auto pin = j.at("pin").get<int>();
    if (pin < 0 || pin > 255) throw Error(Errc::Parse, "pin out of range");
    e.pin = static_cast<std::uint8_t>(pin);
    const auto& v = j.at("value");
    e.value = v.is_string() ? v.get<std::string>() : v.dump();
    return e;
  } catch (const json::exception& ex) {
    throw Error(Errc::Parse, std::string("bad history line: ") + ex.what());
  }
}

HistoryLog::HistoryLog(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error(Errc::Io, "cannot create history directory " + dir_.string() + ": " + ec.message());
}

std::filesystem::path HistoryLog::file_for(std::string_view device_id) const {
  return dir_ / (std::string(device_id) + ".jsonl");
}

void HistoryLog::append(const HistoryEntry& entry) {
  auto it = files_.find(entry.device_id);
  if (it == files_.end()) {
    std::ofstream out(file_for(entry.device_id), std::ios::binary | std::ios::app);
    if (!out) throw Error(Errc::Io, "cannot open " + file_for(entry.device_id).string());
    it = files_.emplace(entry.device_id, std::move(out)).first;
  }
  auto& out = it->second;
  out << history_entry_to_json_line(entry) << '\n';
  out.flush();
  if (!out) throw Error(Errc::Io, "write failed for " + file_for(entry.device_id).string());
}

std::vector<HistoryEntry> HistoryLog::load_all() const {
  std::vector<HistoryEntry> entries;
  std::vector<std::filesystem::path> files;
  for (const auto& item : std::filesystem::directory_iterator(dir_)) {
    if (item.is_regular_file() && item.path().extension() == ".jsonl") files.push_back(item.path());
  }
  std::sort(files.begin(), files.end());

  for (const auto& path : files) {
    std::ifstream in(path, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        entries.push_back(history_entry_from_json_line(line));
      } catch (const Error& e) {
        // Only a torn last line is tolerated.
        if (in.peek() != std::char_traits<char>::eof()) {
          throw Error(Errc::Parse, path.string() + ": " + e.what());
        }
        log::event("history_torn_line", {{"file", path.string()}});
      }
    }
  }
  return entries;
}

Broker::Broker(BrokerConfig config) : config_(std::move(config)), log_(config_.history_path) {
  for (auto& entry : log_.load_all()) {
    PinKey key{entry.device_id, entry.pin};
    auto& latest = latest_[key];
    latest.value = entry.value;
    latest.updated_at_ms = std::max(latest.updated_at_ms, entry.timestamp_ms);
    history_[key].push_back(std::move(entry));
    ++history_count_;
  }
}

void Broker::touch(const Session& session) {
  if (!session.authenticated) return;
  auto& seen = last_seen_[session.device_id];
  seen = std::max(seen, session.last_seen_ms);
}

void Broker::record_write(const std::string& device_id, std::uint8_t pin, std::string value,
                          std::int64_t now_ms) {
  PinKey key{device_id, pin};
  auto found = latest_.find(key);
  std::int64_t ts = found == latest_.end() ? now_ms : std::max(now_ms, found->second.updated_at_ms);

  HistoryEntry entry{ts, device_id, pin, value};
  // Persist first: memory never holds an entry the log does not.
  log_.append(entry);
  latest_[key] = Latest{std::move(value), ts};
  history_[key].push_back(std::move(entry));
  ++history_count_;
}

HandleResult Broker::handle_message(Session& session, const wire::ProtocolMessage& msg,
                                    std::int64_t now_ms) {
  using wire::Command;
  using wire::StatusCode;

  HandleResult result;
  std::lock_guard lock(mutex_);
  session.last_seen_ms = std::max(session.last_seen_ms, now_ms);

  auto reject = [&](StatusCode code) {
    result.responses.push_back(wire::make_response(msg.message_id, code));
    result.disconnect = true;
  };

  if (msg.command == Command::Login) {
    auto token = wire::to_string(msg.body);
    auto it = config_.token_table.find(token);
    if (it == config_.token_table.end()) {
      log::event("broker_auth_rejected", {{"message_id", msg.message_id}});
      reject(StatusCode::InvalidToken);
      return result;
    }
    if (session.authenticated && session.device_id != it->second) {
      reject(StatusCode::IllegalCommand);
      return result;
    }
    session.device_id = it->second;
    session.authenticated = true;
    touch(session);
    result.responses.push_back(wire::make_response(msg.message_id, StatusCode::Ok));
    return result;
  }

  if (!session.authenticated) {
    reject(StatusCode::IllegalCommand);
    return result;
  }
  touch(session);

  switch (msg.command) {
    case Command::Ping:
      result.responses.push_back(wire::make_response(msg.message_id, StatusCode::Ok));
      break;
    case Command::Hw: {
      wire::HardwareBody hw;
      try {
        hw = wire::parse_hardware_body(msg.body);
      } catch (const Error& e) {
        log::event("broker_malformed_body", {{"device", session.device_id}, {"error", e.what()}});
        reject(StatusCode::IllegalCommand);
        break;
      }
      record_write(session.device_id, hw.pin, std::move(hw.value), now_ms);
      break;
    }
    case Command::Rsp:
    case Command::Login:
      break;
  }
  return result;
}

PinRecord Broker::get_latest(std::string_view device_id, std::uint8_t pin, std::int64_t now_ms) const {
  std::lock_guard lock(mutex_);
  auto it = latest_.find(PinKey{std::string(device_id), pin});
  if (it == latest_.end()) {
    throw Error(Errc::NotFound, "no value for device '" + std::string(device_id) + "' pin " +
                                    std::to_string(pin));
  }
  PinRecord rec;
  rec.device_id = std::string(device_id);
  rec.pin = pin;
  rec.value = it->second.value;
  rec.updated_at_ms = it->second.updated_at_ms;
  rec.stale = now_ms - rec.updated_at_ms > config_.heartbeat_timeout_ms;
  return rec;
}

std::vector<HistoryEntry> Broker::get_history(std::string_view device_id, std::uint8_t pin,
                                              std::int64_t from_ms, std::int64_t to_ms) const {
  if (from_ms > to_ms) {
    throw Error(Errc::BadRange, "from " + std::to_string(from_ms) + " > to " + std::to_string(to_ms));
  }
  std::lock_guard lock(mutex_);
  auto it = history_.find(PinKey{std::string(device_id), pin});
  if (it == history_.end()) return {};
  const auto& entries = it->second;
  // Timestamps per pin are non-decreasing, so the range is contiguous.
  auto by_ts = [](const HistoryEntry& e, std::int64_t t) { return e.timestamp_ms < t; };
  auto lo = std::lower_bound(entries.begin(), entries.end(), from_ms, by_ts);
  auto hi = std::lower_bound(lo, entries.end(), to_ms, by_ts);
  return {lo, hi};
}

std::vector<DeviceStatus> Broker::list_devices(std::int64_t now_ms) const {
  std::lock_guard lock(mutex_);
  std::vector<DeviceStatus> out;
  out.reserve(last_seen_.size());
  for (const auto& [id, seen] : last_seen_) {
    out.push_back({id, now_ms - seen <= config_.heartbeat_timeout_ms, seen});
  }
  return out;
}

std::size_t Broker::history_size() const {
  std::lock_guard lock(mutex_);
  return history_count_;
}

}  // namespace envmon::broker
