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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace envmon::wire {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::size_t kHeaderSize = 5;
inline constexpr std::size_t kMaxBodySize = 1024;

enum class Command : std::uint8_t {
  Rsp = 0,
  Login = 2,
  Ping = 6,
  Hw = 20,
};

std::optional<Command> command_from_octet(std::uint8_t octet) noexcept;
std::string_view to_string(Command cmd) noexcept;

enum class StatusCode : std::uint16_t {
  IllegalCommand = 2,
  InvalidToken = 9,
  Ok = 200,
};

/// Wire header: command (1), message id (2, BE), body length (2, BE).
struct ProtocolMessage {
  Command command = Command::Ping;
  std::uint16_t message_id = 1;
  Bytes body;

  friend bool operator==(const ProtocolMessage&, const ProtocolMessage&) = default;
};

// Throws Error(ZeroMessageId) or Error(BodyTooLarge).
Bytes encode_message(const ProtocolMessage& msg);
void append_message(Bytes& out, const ProtocolMessage& msg);

struct DecodeResult {
  std::vector<ProtocolMessage> messages;
  Bytes remainder;
};

/// Extracts every complete message from `buffer`. A truncated tail is
/// returned as the remainder. Throws Error(UnknownCommand),
/// Error(BodyTooLarge) or Error(ZeroMessageId); all three mean the peer is
/// broken and the connection should be dropped.
DecodeResult decode_stream(std::span<const std::uint8_t> buffer);

/// Per-connection reassembly buffer on top of decode_stream.
class StreamDecoder {
 public:
  std::vector<ProtocolMessage> feed(std::span<const std::uint8_t> chunk);
  std::size_t buffered() const noexcept { return pending_.size(); }

 private:
  Bytes pending_;
};

/// Virtual-pin write: "vw" NUL pin NUL value.
struct HardwareBody {
  std::string verb = "vw";
  std::uint8_t pin = 0;
  std::string value;
  double numeric_value = 0.0;

  friend bool operator==(const HardwareBody&, const HardwareBody&) = default;
};

// Throws Error(MalformedBody).
HardwareBody parse_hardware_body(std::span<const std::uint8_t> body);
// Throws Error(MalformedBody) if `value` is not a decimal literal.
Bytes make_hardware_body(std::uint8_t pin, std::string_view value);

Bytes to_bytes(std::string_view s);
std::string to_string(std::span<const std::uint8_t> bytes);

ProtocolMessage make_login(std::uint16_t id, std::string_view token);
ProtocolMessage make_ping(std::uint16_t id);
ProtocolMessage make_hardware_write(std::uint16_t id, std::uint8_t pin, std::string_view value);
ProtocolMessage make_response(std::uint16_t id, StatusCode status);

// Returns the status carried by a 2-octet RSP body, or nullopt.
std::optional<std::uint16_t> response_status(const ProtocolMessage& msg) noexcept;

}  // namespace envmon::wire
