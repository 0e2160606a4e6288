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

#include "edgemeter/timesync.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "edgemeter/error.hpp"

namespace edgemeter {

SyncEstimate estimate_from_probes(const std::vector<ProbeSample>& probes, const SyncOptions& options) {
  if (probes.size() < 3) throw std::invalid_argument("clock estimation needs at least 3 probes");
  const ProbeSample* best = nullptr;
  double lo = probes.front().offset();
  double hi = lo;
  for (const auto& p : probes) {
    const double rtt = p.rtt();
    if (!(rtt <= options.probe_timeout)) {
      throw AnalysisError(ErrorCode::ProbeTimeout, fmt::format("probe round trip {:.6f} s", rtt));
    }
    if (best == nullptr || rtt < best->rtt()) best = &p;
    lo = std::min(lo, p.offset());
    hi = std::max(hi, p.offset());
  }
  SyncEstimate est{best->offset(), std::max(0.0, best->rtt()), probes.size(), hi - lo};
  if (est.dispersion > options.max_dispersion) {
    throw AnalysisError(ErrorCode::ClockSkewTooLarge,
                        fmt::format("probe offsets spread over {:.6f} s", est.dispersion));
  }
  return est;
}

SyncEstimate estimate_offset(const ProbeExchange& exchange, const SyncOptions& options) {
  if (options.probes < 3) throw std::invalid_argument("clock estimation needs at least 3 probes");
  std::vector<ProbeSample> probes;
  probes.reserve(options.probes);
  for (std::size_t i = 0; i < options.probes; ++i) probes.push_back(exchange());
  return estimate_from_probes(probes, options);
}

Micros offset_micros(double offset_s) { return Micros{std::llround(offset_s * 1e6)}; }

Timestamp correct_timestamp(Timestamp dut_time, const SyncEstimate& est) {
  return dut_time - offset_micros(est.offset);
}

std::vector<EventMark> correct_events(std::vector<EventMark> events, const SyncEstimate& est) {
  for (auto& e : events) e.t = correct_timestamp(e.t, est);
  return events;
}

}  // namespace edgemeter
