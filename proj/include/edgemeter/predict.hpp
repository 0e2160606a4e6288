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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "edgemeter/keyvalue.hpp"

namespace edgemeter {

/// What the rate model needs to know about one device/model pairing.
struct DevicePowerProfile {
  std::string name;
  double t_mean_inf = 0.0;  // s per inference
  double w_mean_inf = 0.0;  // W while inferring
  double w_idle = 0.0;      // W while idle (network up)

  /// Per-inference energy in watt-minutes.
  double energy_per_inference() const { return w_mean_inf * t_mean_inf / 60.0; }
  /// Rate at which the device is busy the whole minute, 60 / t_mean_inf.
  double saturation_rate() const { return 60.0 / t_mean_inf; }
};

/// Builds a profile from a measured run: total inference time over N
/// batches and its energy in watt-minutes.
DevicePowerProfile profile_from_run(std::string name, double t_inf, std::uint64_t batch_count,
                                    double wm_inf, double w_idle);

/// Reads `name`, `w_idle` plus either `t_mean_inf` and `w_mean_inf`, or
/// `t_inf`, `batch_count` and `wm_inf`. Throws AnalysisError(InvalidProfile)
/// when t_mean_inf is not positive or a power is negative.
DevicePowerProfile load_profile(const KeyValues& kv);
DevicePowerProfile load_profile(const std::filesystem::path& path);
std::string serialize_profile(const DevicePowerProfile& p);

/// Warning text when idle power exceeds inference power; nullopt otherwise.
std::optional<std::string> profile_warning(const DevicePowerProfile& p);

/// Largest whole number of inferences that fit in one minute.
std::uint64_t max_rate(const DevicePowerProfile& p);

struct RatePoint {
  double energy_per_minute = 0.0;  // watt-minutes per minute
  double busy_fraction = 0.0;      // share of the minute spent inferring
};

/// Predicted energy per minute at `rate` inferences per minute:
///
///   E(r) = r * w_mean_inf * t_mean_inf / 60 + w_idle * (60 - r * t_mean_inf) / 60
///
/// Each inference costs its measured energy; the rest of the minute is
/// spent at idle power. Valid for 0 <= r <= 60 / t_mean_inf; beyond that
/// the device cannot keep up (AnalysisError RateExceedsMax).
RatePoint energy_at_rate(const DevicePowerProfile& p, double rate);

/// The affine model as intercept (idle watts) and slope per inference.
struct RateLine {
  double intercept = 0.0;
  double slope = 0.0;
};
RateLine rate_line(const DevicePowerProfile& p);

/// Rate where both curves cost the same, if it lies within
/// [0, min(max_rate(a), max_rate(b))] and the slopes differ.
std::optional<double> crossover(const DevicePowerProfile& a, const DevicePowerProfile& b);

struct CurveRow {
  double rate = 0.0;
  std::vector<std::optional<RatePoint>> points;  // per profile; empty beyond its max
};

/// Samples every profile on `start, start+step, ...` up to `stop`.
std::vector<CurveRow> sample_curves(const std::vector<DevicePowerProfile>& profiles, double start, double stop,
                                    double step);

}  // namespace edgemeter
