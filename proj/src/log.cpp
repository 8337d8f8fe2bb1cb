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

#include "envmon/log.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <mutex>

namespace envmon::log {

namespace {
std::atomic<bool> g_enabled{true};
std::mutex g_mutex;
}  // namespace

void set_enabled(bool enabled) noexcept { g_enabled.store(enabled); }
bool enabled() noexcept { return g_enabled.load(); }

void event(std::string_view name, nlohmann::json fields) {
  if (!enabled()) return;
  using namespace std::chrono;
  nlohmann::json line = nlohmann::json::object();
  line["ts"] = duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
  line["event"] = name;
  if (fields.is_object()) {
    for (auto& [k, v] : fields.items()) line[k] = v;
  }
  auto text = line.dump() + "\n";
  std::lock_guard lock(g_mutex);
  std::fputs(text.c_str(), stderr);
  std::fflush(stderr);
}

}  // namespace envmon::log
