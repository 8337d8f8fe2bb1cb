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
#include <memory>
#include <mutex>

#include "envmon/broker.hpp"
#include "envmon/clock.hpp"
#include "envmon/transport.hpp"

namespace envmon {

/// In-process stand-in for the broker's TCP listener. Devices connect through
/// LoopbackTransport; detach() behaves like killing the broker process.
class LoopbackHub {
 public:
  explicit LoopbackHub(Clock& clock) : clock_(clock) {}

  void attach(std::shared_ptr<broker::Broker> broker);
  void detach();
  std::shared_ptr<broker::Broker> broker() const;

 private:
  friend class LoopbackTransport;

  Clock& clock_;
  mutable std::mutex mutex_;
  std::shared_ptr<broker::Broker> broker_;
  std::uint64_t generation_ = 0;
};

class LoopbackTransport final : public Transport {
 public:
  explicit LoopbackTransport(LoopbackHub& hub) : hub_(hub) {}

  bool open(const std::string& address) override;
  bool send(std::span<const std::uint8_t> octets) override;
  std::optional<wire::Bytes> receive(std::chrono::milliseconds wait) override;
  void close() override;
  bool is_open() const override { return open_; }

 private:
  bool peer_alive() const;

  LoopbackHub& hub_;
  std::shared_ptr<broker::Broker> broker_;
  std::uint64_t generation_ = 0;
  broker::Session session_;
  wire::Bytes inbox_;
  bool open_ = false;
  bool peer_closed_ = false;
};

}  // namespace envmon
