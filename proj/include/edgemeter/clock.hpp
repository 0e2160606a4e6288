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

#pragma once

#include <atomic>
#include <chrono>

#include "edgemeter/measurement.hpp"

namespace edgemeter {

/// Source of wall-clock time plus the ability to wait on it. Everything that
/// stamps or paces (sampler, PSU simulator, timeouts) goes through a Clock
/// so the same code runs against real time or a virtual timeline.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual Timestamp now() const = 0;
  virtual void sleep_until(Timestamp t) = 0;
  void sleep_for(Micros d) { sleep_until(now() + d); }
};

class SystemClock final : public Clock {
 public:
  Timestamp now() const override;
  void sleep_until(Timestamp t) override;
};

/// A SystemClock shifted by a fixed amount; models a device whose clock
/// disagrees with the monitor's.
class OffsetClock final : public Clock {
 public:
  OffsetClock(Clock& base, Micros offset) : base_(base), offset_(offset) {}
  Timestamp now() const override { return base_.now() + offset_; }
  void sleep_until(Timestamp t) override { base_.sleep_until(t - offset_); }

 private:
  Clock& base_;
  Micros offset_;
};

/// Virtual time. sleep_until() jumps forward instantly and never moves
/// backwards, so simulated runs of any length finish in microseconds.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(Timestamp start = Timestamp{}) : now_us_(start.time_since_epoch().count()) {}
  Timestamp now() const override { return Timestamp{Micros{now_us_.load()}}; }
  void sleep_until(Timestamp t) override;
  void advance(Micros d) { now_us_ += d.count(); }

 private:
  std::atomic<std::int64_t> now_us_;
};

}  // namespace edgemeter
