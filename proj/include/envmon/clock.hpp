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

#include <atomic>
#include <chrono>
#include <cstdint>
#include <thread>

namespace envmon {

/// Millisecond clock the device runner and broker read time from. The
/// virtual implementation lets end-to-end runs skip the real waiting.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::int64_t now_ms() const = 0;
  virtual void sleep_until_ms(std::int64_t t_ms) = 0;
  virtual bool is_virtual() const noexcept { return false; }
};

class SystemClock final : public Clock {
 public:
  std::int64_t now_ms() const override {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
  }

  void sleep_until_ms(std::int64_t t_ms) override {
    auto delta = t_ms - now_ms();
    if (delta > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delta));
  }
};

/// Time only moves when someone sleeps. Never goes backwards. Safe to share
/// between threads; each sleeper just pushes the clock forward.
class VirtualClock final : public Clock {
 public:
  explicit VirtualClock(std::int64_t start_ms = 0) : now_(start_ms) {}

  std::int64_t now_ms() const override { return now_.load(std::memory_order_acquire); }

  void sleep_until_ms(std::int64_t t_ms) override { advance_to(t_ms); }

  void advance_to(std::int64_t t_ms) {
    auto cur = now_.load(std::memory_order_acquire);
    while (cur < t_ms && !now_.compare_exchange_weak(cur, t_ms, std::memory_order_acq_rel)) {
    }
  }

  void advance_by(std::int64_t delta_ms) { now_.fetch_add(delta_ms, std::memory_order_acq_rel); }

  bool is_virtual() const noexcept override { return true; }

 private:
  std::atomic<std::int64_t> now_;
};

}  // namespace envmon
