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

#include <string_view>

#include <json.hpp>

namespace envmon::log {

/// Writes `{"event":name, ...fields}` as one line on stderr. Thread-safe.
void event(std::string_view name, nlohmann::json fields = nlohmann::json::object());

void set_enabled(bool enabled) noexcept;
bool enabled() noexcept;

}  // namespace envmon::log
