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

#include "edgemeter/predict.hpp"

#include <cmath>

#include <fmt/format.h>

#include "edgemeter/error.hpp"
#include "edgemeter/measurement.hpp"

namespace edgemeter {

namespace {

void validate(const DevicePowerProfile& p) {
  if (!(p.t_mean_inf > 0.0) || !std::isfinite(p.t_mean_inf)) {
    throw AnalysisError(ErrorCode::InvalidProfile, fmt::format("{}: t_mean_inf must be positive", p.name));
  }
  if (!(p.w_mean_inf >= 0.0) || !(p.w_idle >= 0.0)) {
    throw AnalysisError(ErrorCode::InvalidProfile, fmt::format("{}: power must be non-negative", p.name));
  }
}

}  // namespace

DevicePowerProfile profile_from_run(std::string name, double t_inf, std::uint64_t batch_count, double wm_inf,
                                    double w_idle) {
  if (batch_count == 0 || !(t_inf > 0.0)) {
    throw AnalysisError(ErrorCode::InvalidProfile, fmt::format("{}: run needs t_inf > 0 and N > 0", name));
  }
  DevicePowerProfile p{std::move(name), t_inf / static_cast<double>(batch_count), wm_inf * 60.0 / t_inf, w_idle};
  validate(p);
  return p;
}

DevicePowerProfile load_profile(const KeyValues& kv) {
  const auto name = kv.get_string("name", "device");
  const double idle = kv.require_double("w_idle");
  if (kv.contains("t_mean_inf") || kv.contains("w_mean_inf")) {
    DevicePowerProfile p{name, kv.require_double("t_mean_inf"), kv.require_double("w_mean_inf"), idle};
    validate(p);
    return p;
  }
  return profile_from_run(name, kv.require_double("t_inf"), kv.get_uint("batch_count", 0),
                          kv.require_double("wm_inf"), idle);
}

DevicePowerProfile load_profile(const std::filesystem::path& path) {
  auto kv = KeyValues::load(path);
  if (!kv.contains("name")) kv.set("name", path.stem().string());
  return load_profile(kv);
}

std::string serialize_profile(const DevicePowerProfile& p) {
  return fmt::format("name = \"{}\"\nt_mean_inf = {}\nw_mean_inf = {}\nw_idle = {}\n", p.name,
                     format_double(p.t_mean_inf), format_double(p.w_mean_inf), format_double(p.w_idle));
}

std::optional<std::string> profile_warning(const DevicePowerProfile& p) {
  if (p.w_mean_inf >= p.w_idle) return std::nullopt;
  return fmt::format("{}: idle power {:.3f} W exceeds inference power {:.3f} W", p.name, p.w_idle, p.w_mean_inf);
}

std::uint64_t max_rate(const DevicePowerProfile& p) {
  validate(p);
  return static_cast<std::uint64_t>(std::floor(60.0 / p.t_mean_inf));
}

RateLine rate_line(const DevicePowerProfile& p) {
  return {p.w_idle, p.energy_per_inference() - p.w_idle * p.t_mean_inf / 60.0};
}

RatePoint energy_at_rate(const DevicePowerProfile& p, double rate) {
  validate(p);
  if (!(rate >= 0.0) || rate > p.saturation_rate()) {
    throw AnalysisError(ErrorCode::RateExceedsMax,
                        fmt::format("{}: {} inferences/min exceeds the maximum of {:.3f}", p.name, rate,
                                    p.saturation_rate()));
  }
  const double busy_seconds = rate * p.t_mean_inf;
  return {rate * p.energy_per_inference() + p.w_idle * (60.0 - busy_seconds) / 60.0, busy_seconds / 60.0};
}

std::optional<double> crossover(const DevicePowerProfile& a, const DevicePowerProfile& b) {
  const auto la = rate_line(a);
  const auto lb = rate_line(b);
  if (la.slope == lb.slope) return std::nullopt;
  const double r = (lb.intercept - la.intercept) / (la.slope - lb.slope);
  const double limit = static_cast<double>(std::min(max_rate(a), max_rate(b)));
  if (!(r >= 0.0) || r > limit) return std::nullopt;
  return r;
}

std::vector<CurveRow> sample_curves(const std::vector<DevicePowerProfile>& profiles, double start, double stop,
                                    double step) {
  if (!(step > 0.0) || !(start >= 0.0) || stop < start) {
    throw AnalysisError(ErrorCode::InvalidProfile, "rate range needs 0 <= start <= stop and step > 0");
  }
  std::vector<CurveRow> rows;
  for (std::uint64_t i = 0;; ++i) {
    const double rate = start + static_cast<double>(i) * step;
    if (rate > stop + 1e-9 * step) break;
    CurveRow row{rate, {}};
    for (const auto& p : profiles) {
      if (rate <= p.saturation_rate()) {
        row.points.push_back(energy_at_rate(p, rate));
      } else {
        row.points.push_back(std::nullopt);
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace edgemeter
