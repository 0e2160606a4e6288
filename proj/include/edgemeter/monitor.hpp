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
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <thread>

#include "edgemeter/clock.hpp"
#include "edgemeter/measurement.hpp"
#include "edgemeter/psu.hpp"

namespace edgemeter {

struct SamplerConfig {
  Micros interval{100'000};
  std::string port_spec;  // device path or sim:...
  std::string register_profile = "hm310p-community";
  std::filesystem::path out_path = "power.csv";
  bool live = false;
  unsigned max_consecutive_failures = 10;
};

struct SamplerStats {
  std::uint64_t samples = 0;
  std::uint64_t gaps = 0;
};

/// Line time of one measurement exchange (8-byte request plus the read
/// response) at the given baud rate, 10 bits per byte.
Micros expected_round_trip(unsigned baud, std::uint16_t register_count);
/// Warning text when the interval is shorter than twice the round trip.
std::optional<std::string> interval_warning(Micros interval, unsigned baud, std::uint16_t register_count);

/// Polls the supply on a fixed grid and appends one power-file line per
/// successful read. Failed reads are counted as gaps and never written.
/// More than `max_consecutive_failures` failures in a row end the run with
/// AnalysisError(SamplerDied).
class Sampler {
 public:
  Sampler(PsuClient& client, Clock& clock, const std::filesystem::path& out_path, Micros interval,
          unsigned max_consecutive_failures = 10, std::ostream* live = nullptr);
  ~Sampler();
  Sampler(const Sampler&) = delete;
  Sampler& operator=(const Sampler&) = delete;

  /// Samples on the calling thread until the clock reaches `until`
  /// (exclusive) or a stop is requested.
  SamplerStats run_until(Timestamp until);
  void start();
  void request_stop() { stop_ = true; }
  /// Joins the background thread; rethrows whatever ended it.
  SamplerStats stop();
  SamplerStats stats() const;

 private:
  void record(const PowerSample& s);

  PsuClient& client_;
  Clock& clock_;
  Micros interval_;
  unsigned max_failures_;
  std::ostream* live_;
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> out_{nullptr, &std::fclose};
  std::atomic<bool> stop_{false};
  std::atomic<std::uint64_t> samples_{0};
  std::atomic<std::uint64_t> gaps_{0};
  std::optional<Timestamp> last_t_;
  std::thread thread_;
  std::exception_ptr failure_;
};

struct TimeRange {
  Timestamp start;
  Timestamp end;
};

/// Parses `t0:t1` in decimal seconds.
std::optional<TimeRange> parse_time_range(std::string_view text);

inline constexpr std::size_t kMinIdleSamples = 10;

/// Mean power over samples with start <= t <= end. Throws
/// AnalysisError(WindowOverlapsInference) when any batch interval touches
/// the window and AnalysisError(WindowTooSparse) below ten samples.
double measure_idle(std::span<const PowerSample> samples, const TimeRange& window,
                    std::span<const BatchInterval> intervals = {});

}  // namespace edgemeter
