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
#include <string>
#include <string_view>
#include <vector>

// Small string helpers shared by the codecs and file readers.
namespace envmon::text {

std::string_view trim(std::string_view s) noexcept;
std::vector<std::string_view> split(std::string_view s, char sep);

std::optional<std::int64_t> parse_int64(std::string_view s) noexcept;

// Accepts only finite values.
std::optional<double> parse_double(std::string_view s) noexcept;

/// True for `-?[0-9]+(\.[0-9]+)?`, the only value syntax allowed on the wire.
bool is_decimal_literal(std::string_view s) noexcept;

/// Renders a count of tenths as a decimal with exactly one fractional digit:
/// 234 -> "23.4", 560 -> "56.0", -5 -> "-0.5".
std::string format_tenths(std::int64_t tenths);

}  // namespace envmon::text
