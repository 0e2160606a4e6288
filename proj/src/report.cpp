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

#include "edgemeter/report.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "edgemeter/error.hpp"

namespace edgemeter {

namespace {

std::string or_na(const std::optional<double>& v, const char* format_unit) {
  return v ? fmt::format(fmt::runtime(format_unit), *v) : std::string("n/a");
}

}  // namespace

std::string summary_table(const AggregateReport& r) {
  std::string out;
  out += fmt::format("run_id: {}\n", r.run_id);
  out += fmt::format("batches: {} x {}\n", r.batch_count, r.batch_size);
  out += fmt::format("t_inf: {:.6f} s\n", r.t_inf);
  out += fmt::format("t_mean_inf: {:.6f} s\n", r.t_mean_inf);
  out += fmt::format("t_test: {}\n", or_na(r.t_test, "{:.6f} s"));
  out += fmt::format("w_mean_inf: {:.6f} W\n", r.w_mean_inf);
  out += fmt::format("wm_inf: {:.3f} wattmin\n", r.wm_inf);
  out += fmt::format("empty_batches: {}\n", r.empty_batch_count);
  out += fmt::format("idle: {}\n", or_na(r.idle_power, "{:.6f} W"));
  out += fmt::format("top1: {}\n", or_na(r.top1, "{:.6f}"));
  out += fmt::format("top5: {}\n", or_na(r.top5, "{:.6f}"));
  out += fmt::format("clock_dispersion: {:.6f} s\n", r.clock_dispersion);
  return out;
}

std::pair<Timestamp, Timestamp> plot_time_span(std::span<const PowerSample> samples,
                                               std::span<const BatchInterval> intervals) {
  Timestamp lo = Timestamp::max();
  Timestamp hi = Timestamp::min();
  for (const auto& s : samples) {
    lo = std::min(lo, s.t);
    hi = std::max(hi, s.t);
  }
  for (const auto& iv : intervals) {
    lo = std::min(lo, iv.start);
    hi = std::max(hi, iv.end);
  }
  return {lo, hi};
}

std::string render_svg(std::span<const PowerSample> samples, std::span<const BatchInterval> intervals,
                       bool annotate, const std::optional<std::string>& generated_at, const PlotLayout& layout) {
  if (samples.empty()) throw AnalysisError(ErrorCode::EmptyTrace, "power trace has no samples");

  const auto [t0, t1] = plot_time_span(samples, intervals);
  const double span_s = t1 > t0 ? to_seconds(t1 - t0) : 1.0;
  double peak = 0.0;
  for (const auto& s : samples) peak = std::max(peak, s.power);
  const double p_max = peak > 0.0 ? peak * 1.1 : 1.0;

  const double plot_w = layout.width - layout.left - layout.right;
  const double plot_h = layout.height - layout.top - layout.bottom;
  auto x_of = [&](Timestamp t) { return layout.left + to_seconds(t - t0) / span_s * plot_w; };
  auto y_of = [&](double watts) { return layout.top + (1.0 - watts / p_max) * plot_h; };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (generated_at) svg += fmt::format("<!-- generated: {} -->\n", *generated_at);
  svg += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\">\n",
      layout.width, layout.height, layout.width, layout.height);
  svg += "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  if (annotate) {
    for (const auto& iv : intervals) {
      const double x = x_of(iv.start);
      svg += fmt::format(
          "<rect class=\"batch-band\" data-batch=\"{}\" x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" "
          "height=\"{:.2f}\" fill=\"#f4a261\" fill-opacity=\"0.35\"/>\n",
          iv.index, x, layout.top, x_of(iv.end) - x, plot_h);
    }
    if (!intervals.empty() && intervals.size() <= 20) {
      for (const auto& iv : intervals) {
        svg += fmt::format(
            "<text class=\"band-label\" x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"10\" text-anchor=\"middle\">{}</text>\n",
            (x_of(iv.start) + x_of(iv.end)) / 2.0, layout.top - 6.0, iv.index);
      }
    } else if (!intervals.empty()) {
      svg += fmt::format(
          "<text class=\"band-label\" x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"12\">batches {}-{}</text>\n",
          layout.left, layout.top - 8.0, intervals.front().index, intervals.back().index);
    }
  }

  // Axes with five ticks each.
  svg += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"black\"/>\n",
                     layout.left, layout.top, layout.top + plot_h);
  svg += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"black\"/>\n",
                     layout.left, layout.top + plot_h, layout.left + plot_w);
  for (int i = 0; i <= 4; ++i) {
    const double frac = i / 4.0;
    svg += fmt::format(
        "<text class=\"tick\" x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"10\" text-anchor=\"middle\">{:.1f}</text>\n",
        layout.left + frac * plot_w, layout.top + plot_h + 16.0, frac * span_s);
    svg += fmt::format(
        "<text class=\"tick\" x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"10\" text-anchor=\"end\">{:.2f}</text>\n",
        layout.left - 6.0, layout.top + (1.0 - frac) * plot_h + 3.0, frac * p_max);
  }
  svg += fmt::format(
      "<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"12\" text-anchor=\"middle\">time (s)</text>\n",
      layout.left + plot_w / 2.0, layout.height - 10.0);
  svg += fmt::format(
      "<text x=\"14\" y=\"{:.2f}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 {:.2f})\">power (W)</text>\n",
      layout.top + plot_h / 2.0, layout.top + plot_h / 2.0);

  svg += "<polyline class=\"power-trace\" fill=\"none\" stroke=\"#264653\" stroke-width=\"1\" points=\"";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (i != 0) svg += ' ';
    svg += fmt::format("{:.2f},{:.2f}", x_of(samples[i].t), y_of(samples[i].power));
  }
  svg += "\"/>\n</svg>\n";
  return svg;
}

std::string render_power_series(std::span<const PowerSample> samples) {
  std::string out;
  for (const auto& s : samples) out += fmt::format("{},{:.6f}\n", format_timestamp(s.t), s.power);
  return out;
}

std::string render_band_series(std::span<const BatchInterval> intervals) {
  std::string out;
  for (const auto& iv : intervals) out += fmt::format("{},{}\n", format_timestamp(iv.start), format_timestamp(iv.end));
  return out;
}

}  // namespace edgemeter
