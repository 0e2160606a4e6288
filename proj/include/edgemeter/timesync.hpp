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

#include <cstddef>
#include <functional>
#include <vector>

#include "edgemeter/measurement.hpp"

namespace edgemeter {

/// One request/reply exchange. t1 and t4 are read on the DUT clock, t2 and
/// t3 on the monitor clock; all in seconds.
struct ProbeSample {
  double t1 = 0.0;  // DUT send
  double t2 = 0.0;  // monitor receive
  double t3 = 0.0;  // monitor send
  double t4 = 0.0;  // DUT receive

  /// DUT clock minus monitor clock, assuming symmetric legs.
  double offset() const { return ((t1 - t2) + (t4 - t3)) / 2.0; }
  double rtt() const { return (t4 - t1) - (t3 - t2); }
};

struct SyncEstimate {
  double offset = 0.0;      // s, DUT minus monitor
  double rtt = 0.0;         // s, of the probe the offset came from
  std::size_t probe_count = 0;
  double dispersion = 0.0;  // s, max - min of per-probe offsets
};

struct SyncOptions {
  std::size_t probes = 8;
  double max_dispersion = 0.005;  // s
  double probe_timeout = 1.0;     // s
};

using ProbeExchange = std::function<ProbeSample()>;

/// Minimum-RTT filter over `options.probes` round trips (at least 3).
/// Throws AnalysisError(ProbeTimeout) when a probe's round trip exceeds the
/// timeout and AnalysisError(ClockSkewTooLarge) when the per-probe offsets
/// spread wider than `max_dispersion`.
SyncEstimate estimate_offset(const ProbeExchange& exchange, const SyncOptions& options = {});

/// Same filter over probes already collected.
SyncEstimate estimate_from_probes(const std::vector<ProbeSample>& probes,
                                  const SyncOptions& options = {});

/// Offset rounded to the microsecond grid timestamps live on. Rounding is
/// symmetric, so shifting by o and then by -o is the identity.
Micros offset_micros(double offset_s);

/// Moves DUT-clock events onto the monitor clock: t - offset.
std::vector<EventMark> correct_events(std::vector<EventMark> events, const SyncEstimate& est);
Timestamp correct_timestamp(Timestamp dut_time, const SyncEstimate& est);

}  // namespace edgemeter
