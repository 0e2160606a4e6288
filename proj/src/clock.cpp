// Copyright 2026 The edgemeter Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "edgemeter/clock.hpp"

#include <thread>

namespace edgemeter {

Timestamp SystemClock::now() const {
  return std::chrono::time_point_cast<Micros>(std::chrono::system_clock::now());
}

void SystemClock::sleep_until(Timestamp t) {
  const auto remaining = t - now();
  if (remaining > Micros::zero()) std::this_thread::sleep_for(remaining);
}

void ManualClock::sleep_until(Timestamp t) {
  const auto target = t.time_since_epoch().count();
  auto current = now_us_.load();
  while (current < target && !now_us_.compare_exchange_weak(current, target)) {
  }
}

}  // namespace edgemeter
