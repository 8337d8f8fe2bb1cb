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

#include "envmon/wire_protocol.hpp"

#include <algorithm>

#include "envmon/error.hpp"
#include "envmon/text.hpp"

namespace envmon::wire {

namespace {

std::uint16_t read_be16(const std::uint8_t* p) noexcept {
  return static_cast<std::uint16_t>((p[0] << 8) | p[1]);
}

void write_be16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

[[noreturn]] void malformed(const std::string& why) {
  throw Error(Errc::MalformedBody, "malformed hardware body: " + why);
}

}  // namespace

std::optional<Command> command_from_octet(std::uint8_t octet) noexcept {
  switch (octet) {
    case 0: return Command::Rsp;
    case 2: return Command::Login;
    case 6: return Command::Ping;
    case 20: return Command::Hw;
    default: return std::nullopt;
  }
}

std::string_view to_string(Command cmd) noexcept {
  switch (cmd) {
    case Command::Rsp: return "RSP";
    case Command::Login: return "LOGIN";
    case Command::Ping: return "PING";
    case Command::Hw: return "HW";
  }
  return "?";
}

void append_message(Bytes& out, const ProtocolMessage& msg) {
  if (msg.message_id == 0) throw Error(Errc::ZeroMessageId, "message id must be nonzero");
  if (msg.body.size() > kMaxBodySize) {
    throw Error(Errc::BodyTooLarge, "body of " + std::to_string(msg.body.size()) +
                                        " octets exceeds " + std::to_string(kMaxBodySize));
  }
  out.push_back(static_cast<std::uint8_t>(msg.command));
  write_be16(out, msg.message_id);
  write_be16(out, static_cast<std::uint16_t>(msg.body.size()));
  out.insert(out.end(), msg.body.begin(), msg.body.end());
}

Bytes encode_message(const ProtocolMessage& msg) {
  Bytes out;
  out.reserve(kHeaderSize + msg.body.size());
  append_message(out, msg);
  return out;
}

DecodeResult decode_stream(std::span<const std::uint8_t> buffer) {
  DecodeResult result;
  std::size_t pos = 0;
  while (buffer.size() - pos >= 1) {
    const std::uint8_t* p = buffer.data() + pos;
    // The command octet alone is enough to reject garbage early.
    auto cmd = command_from_octet(p[0]);
    if (!cmd) {
      throw Error(Errc::UnknownCommand, "unknown command code " + std::to_string(p[0]));
    }
    if (buffer.size() - pos < kHeaderSize) break;

    std::uint16_t id = read_be16(p + 1);
    std::uint16_t length = read_be16(p + 3);
    if (length > kMaxBodySize) {
      throw Error(Errc::BodyTooLarge, "declared body length " + std::to_string(length));
    }
    if (id == 0) throw Error(Errc::ZeroMessageId, "message id 0 on the wire");
    if (buffer.size() - pos < kHeaderSize + length) break;

    ProtocolMessage msg;
    msg.command = *cmd;
    msg.message_id = id;
    msg.body.assign(p + kHeaderSize, p + kHeaderSize + length);
    result.messages.push_back(std::move(msg));
    pos += kHeaderSize + length;
  }
  result.remainder.assign(buffer.begin() + static_cast<std::ptrdiff_t>(pos), buffer.end());
  return result;
}

std::vector<ProtocolMessage> StreamDecoder::feed(std::span<const std::uint8_t> chunk) {
  pending_.insert(pending_.end(), chunk.begin(), chunk.end());
  auto result = decode_stream(pending_);
  pending_ = std::move(result.remainder);
  return std::move(result.messages);
}

HardwareBody parse_hardware_body(std::span<const std::uint8_t> body) {
  std::string raw = to_string(body);
  auto fields = text::split(raw, '\0');
  if (fields.size() != 3) malformed("expected 3 NUL-separated fields, got " + std::to_string(fields.size()));
  if (fields[0] != "vw") malformed("unsupported verb '" + std::string(fields[0]) + "'");

  auto pin_text = fields[1];
  if (pin_text.empty() || pin_text.size() > 3 ||
      !std::all_of(pin_text.begin(), pin_text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    malformed("bad pin '" + std::string(pin_text) + "'");
  }
  auto pin = text::parse_int64(pin_text);
  if (!pin || *pin > 255) malformed("pin out of range");

  if (!text::is_decimal_literal(fields[2])) malformed("bad value '" + std::string(fields[2]) + "'");
  auto value = text::parse_double(fields[2]);
  if (!value) malformed("value not finite");

  HardwareBody hw;
  hw.verb = "vw";
  hw.pin = static_cast<std::uint8_t>(*pin);
  hw.value = std::string(fields[2]);
  hw.numeric_value = *value;
  return hw;
}

Bytes make_hardware_body(std::uint8_t pin, std::string_view value) {
  if (!text::is_decimal_literal(value)) malformed("bad value '" + std::string(value) + "'");
  std::string s = "vw";
  s.push_back('\0');
  s += std::to_string(pin);
  s.push_back('\0');
  s += value;
  return to_bytes(s);
}

Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

std::string to_string(std::span<const std::uint8_t> bytes) {
  return std::string(bytes.begin(), bytes.end());
}

ProtocolMessage make_login(std::uint16_t id, std::string_view token) {
  return {Command::Login, id, to_bytes(token)};
}

ProtocolMessage make_ping(std::uint16_t id) { return {Command::Ping, id, {}}; }

ProtocolMessage make_hardware_write(std::uint16_t id, std::uint8_t pin, std::string_view value) {
  return {Command::Hw, id, make_hardware_body(pin, value)};
}

ProtocolMessage make_response(std::uint16_t id, StatusCode status) {
  ProtocolMessage msg{Command::Rsp, id, {}};
  write_be16(msg.body, static_cast<std::uint16_t>(status));
  return msg;
}

std::optional<std::uint16_t> response_status(const ProtocolMessage& msg) noexcept {
  if (msg.command != Command::Rsp || msg.body.size() != 2) return std::nullopt;
  return read_be16(msg.body.data());
}

}  // namespace envmon::wire
