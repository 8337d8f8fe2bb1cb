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

#include "envmon/error.hpp"

namespace envmon {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::OutOfRange: return "out of range";
    case Errc::ChecksumMismatch: return "checksum mismatch";
    case Errc::TooSoon: return "too soon";
    case Errc::ReplayExhausted: return "replay exhausted";
    case Errc::BodyTooLarge: return "body too large";
    case Errc::ZeroMessageId: return "zero message id";
    case Errc::UnknownCommand: return "unknown command";
    case Errc::MalformedBody: return "malformed body";
    case Errc::AuthRejected: return "auth rejected";
    case Errc::NotFound: return "not found";
    case Errc::BadRange: return "bad range";
    case Errc::ZeroReference: return "zero reference";
    case Errc::EmptyOverlap: return "empty overlap";
    case Errc::ConfigInvalid: return "config invalid";
    case Errc::BindFailure: return "bind failure";
    case Errc::Io: return "i/o error";
    case Errc::Parse: return "parse error";
  }
  return "unknown";
}

}  // namespace envmon
