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

#include <optional>
#include <span>
#include <string>

#include "edgemeter/aggregate.hpp"
#include "edgemeter/measurement.hpp"

namespace edgemeter {

/// Fixed-order human summary, one `key: value unit` line per field; absent
/// values print as `n/a`.
std::string summary_table(const AggregateReport& report);

/// Pixel geometry of rendered plots. Time maps linearly onto
/// [left, width - right], power onto [height - bottom, top] from 0 W to
/// 110% of the peak sample.
struct PlotLayout {
  double width = 960.0;
  double height = 480.0;
  double left = 70.0;
  double right = 20.0;
  double top = 30.0;
  double bottom = 50.0;
};

/// Time span covered by a plot: from the earliest sample or interval start
/// to the latest sample or interval end.
std::pair<Timestamp, Timestamp> plot_time_span(std::span<const PowerSample> samples,
                                               std::span<const BatchInterval> intervals);

/// Power polyline plus, with `annotate`, one shaded `batch-band` rect per
/// interval. `generated_at` becomes a single comment line when given.
/// Throws AnalysisError(EmptyTrace) without samples.
std::string render_svg(std::span<const PowerSample> samples, std::span<const BatchInterval> intervals,
                       bool annotate, const std::optional<std::string>& generated_at = std::nullopt,
                       const PlotLayout& layout = {});

/// `time_s,power_w` per sample, power-file number conventions.
std::string render_power_series(std::span<const PowerSample> samples);
/// `start_s,end_s` per interval.
std::string render_band_series(std::span<const BatchInterval> intervals);

}  // namespace edgemeter
