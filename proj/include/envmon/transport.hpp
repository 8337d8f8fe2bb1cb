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
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "envmon/wire_protocol.hpp"

namespace envmon {

/// Byte pipe between a device and the broker.
class Transport {
 public:
  virtual ~Transport() = default;

  virtual bool open(const std::string& address) = 0;
  // false means the connection is gone.
  virtual bool send(std::span<const std::uint8_t> octets) = 0;
  // Waits up to `wait` for data. Empty vector: nothing yet. nullopt: peer closed.
  virtual std::optional<wire::Bytes> receive(std::chrono::milliseconds wait) = 0;
  virtual void close() = 0;
  virtual bool is_open() const = 0;
};

struct HostPort {
  std::string host;
  std::uint16_t port = 0;
};

// "host:port"; the port may be 0 for listeners. Throws Error(ConfigInvalid).
HostPort parse_host_port(std::string_view address);

/// Blocking-connect TCP client with poll()-based receive.
class TcpTransport final : public Transport {
 public:
  TcpTransport() = default;
  ~TcpTransport() override;
  TcpTransport(const TcpTransport&) = delete;
  TcpTransport& operator=(const TcpTransport&) = delete;

  bool open(const std::string& address) override;
  bool send(std::span<const std::uint8_t> octets) override;
  std::optional<wire::Bytes> receive(std::chrono::milliseconds wait) override;
  void close() override;
  bool is_open() const override { return fd_ >= 0; }

 private:
  int fd_ = -1;
};

}  // namespace envmon
