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
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "envmon/wire_protocol.hpp"

namespace envmon::broker {

struct BrokerConfig {
  std::string listen_address = "127.0.0.1:8442";
  std::string http_listen_address = "127.0.0.1:8080";
  // auth token -> device id
  std::map<std::string, std::string> token_table;
  std::filesystem::path history_path = "history";
  std::int64_t heartbeat_timeout_ms = 30000;

  // Throws Error(ConfigInvalid): duplicate device ids, unsafe ids, bad timeout.
  void validate() const;
};

/// Device ids become file names, so they are restricted to [A-Za-z0-9_.-].
bool is_valid_device_id(std::string_view id) noexcept;

struct PinRecord {
  std::string device_id;
  std::uint8_t pin = 0;
  std::string value;
  std::int64_t updated_at_ms = 0;
  bool stale = false;
};

struct HistoryEntry {
  std::int64_t timestamp_ms = 0;
  std::string device_id;
  std::uint8_t pin = 0;
  std::string value;

  friend bool operator==(const HistoryEntry&, const HistoryEntry&) = default;
};

struct DeviceStatus {
  std::string device_id;
  bool online = false;
  std::int64_t last_seen_ms = 0;
};

std::string history_entry_to_json_line(const HistoryEntry& entry);
// Throws Error(Parse).
HistoryEntry history_entry_from_json_line(std::string_view line);

/// Append-only `<dir>/<device_id>.jsonl` files, one record per line.
class HistoryLog {
 public:
  explicit HistoryLog(std::filesystem::path dir);

  // Flushed before returning. Throws Error(Io).
  void append(const HistoryEntry& entry);
  // Every device file, each in file order. A torn final line (crash mid-write)
  // is skipped.
  std::vector<HistoryEntry> load_all() const;
  std::filesystem::path file_for(std::string_view device_id) const;

 private:
  std::filesystem::path dir_;
  std::map<std::string, std::ofstream, std::less<>> files_;
};

/// Per-connection broker state. Owned by exactly one connection handler.
struct Session {
  std::string device_id;
  bool authenticated = false;
  std::int64_t last_seen_ms = 0;
  wire::StreamDecoder decoder;
};

struct HandleResult {
  std::vector<wire::ProtocolMessage> responses;
  bool disconnect = false;
};

/// Authentication, latest-value store and history. All public members are
/// safe to call from many connection threads at once; mutations are
/// serialized by one mutex.
class Broker {
 public:
  // Rebuilds the latest-value cache from the history log.
  explicit Broker(BrokerConfig config);

  HandleResult handle_message(Session& session, const wire::ProtocolMessage& msg, std::int64_t now_ms);

  // Throws Error(NotFound).
  PinRecord get_latest(std::string_view device_id, std::uint8_t pin, std::int64_t now_ms) const;
  // Half-open [from_ms, to_ms). Throws Error(BadRange) when from > to.
  std::vector<HistoryEntry> get_history(std::string_view device_id, std::uint8_t pin,
                                        std::int64_t from_ms, std::int64_t to_ms) const;
  std::vector<DeviceStatus> list_devices(std::int64_t now_ms) const;

  std::size_t history_size() const;
  const BrokerConfig& config() const noexcept { return config_; }

 private:
  struct Latest {
    std::string value;
    std::int64_t updated_at_ms = 0;
  };
  using PinKey = std::pair<std::string, std::uint8_t>;

  void record_write(const std::string& device_id, std::uint8_t pin, std::string value,
                    std::int64_t now_ms);
  void touch(const Session& session);

  BrokerConfig config_;
  mutable std::mutex mutex_;
  HistoryLog log_;
  std::map<PinKey, Latest> latest_;
  std::map<PinKey, std::vector<HistoryEntry>> history_;
  std::map<std::string, std::int64_t> last_seen_;
  std::size_t history_count_ = 0;
};

}  // namespace envmon::broker
