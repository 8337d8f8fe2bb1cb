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

#include "envmon/loopback.hpp"

#include "envmon/error.hpp"

namespace envmon {

void LoopbackHub::attach(std::shared_ptr<broker::Broker> broker) {
  std::lock_guard lock(mutex_);
  broker_ = std::move(broker);
  ++generation_;
}

void LoopbackHub::detach() {
  std::lock_guard lock(mutex_);
  broker_.reset();
  ++generation_;
}

std::shared_ptr<broker::Broker> LoopbackHub::broker() const {
  std::lock_guard lock(mutex_);
  return broker_;
}

bool LoopbackTransport::peer_alive() const {
  std::lock_guard lock(hub_.mutex_);
  return hub_.broker_ && hub_.generation_ == generation_;
}

bool LoopbackTransport::open(const std::string&) {
  close();
  std::lock_guard lock(hub_.mutex_);
  if (!hub_.broker_) return false;
  broker_ = hub_.broker_;
  generation_ = hub_.generation_;
  session_ = broker::Session{};
  open_ = true;
  peer_closed_ = false;
  return true;
}

bool LoopbackTransport::send(std::span<const std::uint8_t> octets) {
  if (!open_ || peer_closed_ || !peer_alive()) return false;
  std::vector<wire::ProtocolMessage> messages;
  try {
    messages = session_.decoder.feed(octets);
  } catch (const Error&) {
    peer_closed_ = true;
    return true;
  }
  for (const auto& msg : messages) {
    auto result = broker_->handle_message(session_, msg, hub_.clock_.now_ms());
    for (const auto& rsp : result.responses) wire::append_message(inbox_, rsp);
    if (result.disconnect) {
      peer_closed_ = true;
      break;
    }
  }
  return true;
}

std::optional<wire::Bytes> LoopbackTransport::receive(std::chrono::milliseconds) {
  if (!open_) return std::nullopt;
  if (!inbox_.empty()) {
    wire::Bytes out;
    out.swap(inbox_);
    return out;
  }
  if (peer_closed_ || !peer_alive()) return std::nullopt;
  return wire::Bytes{};
}

void LoopbackTransport::close() {
  open_ = false;
  peer_closed_ = false;
  broker_.reset();
  inbox_.clear();
  session_ = broker::Session{};
}

}  // namespace envmon
