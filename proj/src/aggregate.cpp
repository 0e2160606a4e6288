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

#include "edgemeter/aggregate.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

#include <fmt/format.h>
#include <json.hpp>

#include "edgemeter/error.hpp"

namespace edgemeter {

Timing compute_timing(std::span<const BatchInterval> intervals, const std::optional<TestWindow>& window,
                      std::uint64_t batch_count) {
  if (intervals.empty() || batch_count == 0) {
    throw AnalysisError(ErrorCode::NoIntervals, "run has no complete batch intervals");
  }
  if (batch_count != intervals.size()) {
    throw AnalysisError(ErrorCode::ManifestMismatch,
                        fmt::format("expected {} batches, events hold {}", batch_count, intervals.size()));
  }
  Micros total{0};
  for (const auto& iv : intervals) total += iv.duration();
  Timing timing;
  timing.t_inf = to_seconds(total);
  timing.t_mean_inf = timing.t_inf / static_cast<double>(batch_count);
  if (window) timing.t_test = to_seconds(window->end - window->start);
  return timing;
}

std::vector<BatchPower> align_power(std::span<const PowerSample> samples,
                                    std::span<const BatchInterval> intervals) {
  std::vector<PowerSample> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end(), [](const PowerSample& a, const PowerSample& b) {
    return std::tie(a.t, a.power, a.current, a.voltage) < std::tie(b.t, b.power, b.current, b.voltage);
  });

  std::vector<BatchPower> batches;
  batches.reserve(intervals.size());
  for (const auto& iv : intervals) {
    BatchPower bp;
    bp.index = iv.index;
    bp.duration_s = to_seconds(iv.duration());
    auto it = std::lower_bound(sorted.begin(), sorted.end(), iv.start,
                               [](const PowerSample& s, Timestamp t) { return s.t < t; });
    for (; it != sorted.end() && it->t <= iv.end; ++it) bp.watts.push_back(it->power);
    if (!bp.watts.empty()) {
      bp.mean = std::accumulate(bp.watts.begin(), bp.watts.end(), 0.0) / static_cast<double>(bp.watts.size());
    }
    batches.push_back(std::move(bp));
  }
  return batches;
}

Energy compute_energy(std::span<const BatchPower> batches, double t_inf) {
  Energy e;
  double sum = 0.0;
  for (const auto& b : batches) {
    if (b.mean) {
      sum += *b.mean;
      ++e.non_empty_batches;
    } else {
      ++e.empty_batches;
    }
  }
  if (e.non_empty_batches == 0) {
    throw AnalysisError(ErrorCode::AllBatchesEmpty, "no power sample falls inside any batch interval");
  }
  e.w_mean_inf = sum / static_cast<double>(e.non_empty_batches);
  e.wm_inf = e.w_mean_inf * t_inf / 60.0;
  return e;
}

std::optional<std::size_t> rank_of(const InferenceResult& result, std::int64_t truth, std::int64_t label_offset) {
  std::vector<ClassScore> ranked = result.topk;
  std::sort(ranked.begin(), ranked.end(), [](const ClassScore& a, const ClassScore& b) {
    return a.score != b.score ? a.score > b.score : a.class_index < b.class_index;
  });
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (ranked[i].class_index - label_offset == truth) return i + 1;
  }
  return std::nullopt;
}

std::map<unsigned, double> score_topk(std::span<const InferenceResult> results,
                                      const std::map<std::string, std::int64_t>& ground_truth,
                                      const std::set<unsigned>& ks, std::int64_t label_offset) {
  std::map<unsigned, double> accuracy;
  if (ks.empty()) return accuracy;
  const unsigned max_k = *ks.rbegin();
  std::map<unsigned, std::size_t> hits;
  for (const auto& r : results) {
    auto truth = ground_truth.find(r.sample_id);
    if (truth == ground_truth.end()) {
      throw AnalysisError(ErrorCode::MissingGroundTruth, fmt::format("no ground truth for '{}'", r.sample_id));
    }
    if (r.topk.size() < max_k) {
      throw AnalysisError(ErrorCode::TopKTooShort,
                          fmt::format("'{}' ranks {} classes, top-{} needs {}", r.sample_id, r.topk.size(),
                                      max_k, max_k));
    }
    const auto rank = rank_of(r, truth->second, label_offset);
    for (unsigned k : ks) {
      if (rank && *rank <= k) ++hits[k];
    }
  }
  for (unsigned k : ks) {
    accuracy[k] = results.empty() ? 0.0 : static_cast<double>(hits[k]) / static_cast<double>(results.size());
  }
  return accuracy;
}

AggregateReport build_report(const RunManifest& manifest, std::span<const PowerSample> samples,
                             const EventLog& events, const ReportInputs& inputs) {
  if (events.test_window) {
    for (const auto& iv : events.intervals) {
      if (iv.start < events.test_window->start || iv.end > events.test_window->end) {
        throw AnalysisError(ErrorCode::IntervalOutsideTestWindow,
                            fmt::format("batch {} lies outside test_start..test_end", iv.index),
                            static_cast<std::int64_t>(iv.index));
      }
    }
  }
  const auto timing = compute_timing(events.intervals, events.test_window, manifest.batch_count);
  const auto batches = align_power(samples, events.intervals);
  const auto energy = compute_energy(batches, timing.t_inf);

  AggregateReport report;
  report.run_id = manifest.run_id;
  report.batch_count = manifest.batch_count;
  report.batch_size = manifest.batch_size;
  report.t_inf = timing.t_inf;
  report.t_mean_inf = timing.t_mean_inf;
  report.t_test = timing.t_test;
  report.w_mean_inf = energy.w_mean_inf;
  report.wm_inf = energy.wm_inf;
  report.empty_batch_count = energy.empty_batches;
  report.clock_offset = manifest.clock_offset;
  report.clock_dispersion = manifest.clock_dispersion;
  for (const auto& b : batches) report.per_batch.push_back({b.index, b.duration_s, b.mean, b.watts.size()});

  if (inputs.idle_window) report.idle_power = measure_idle(samples, *inputs.idle_window, events.intervals);

  if (inputs.results && inputs.ground_truth) {
    const auto& results = *inputs.results;
    const bool have_top5 = std::all_of(results.begin(), results.end(),
                                       [](const InferenceResult& r) { return r.topk.size() >= 5; });
    const auto acc = score_topk(results, *inputs.ground_truth,
                                have_top5 ? std::set<unsigned>{1, 5} : std::set<unsigned>{1}, inputs.label_offset);
    report.top1 = acc.at(1);
    if (have_top5) report.top5 = acc.at(5);
  }
  return report;
}

AggregateReport build_report_from_files(const RunManifest& manifest, const ReportInputs& inputs) {
  const auto samples = parse_power_file(read_file(manifest.power_file));
  const auto events = parse_events_file(read_file(manifest.events_file));
  ReportInputs effective = inputs;
  if (!effective.results && manifest.results_file) {
    effective.results = parse_results_file(read_file(*manifest.results_file));
  }
  return build_report(manifest, samples, events, effective);
}

namespace {

using ordered = nlohmann::ordered_json;

template <class T>
ordered opt(const std::optional<T>& v) {
  return v ? ordered(*v) : ordered(nullptr);
}

template <class T>
std::optional<T> get_opt(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<T>();
}

}  // namespace

std::string serialize_report(const AggregateReport& r) {
  ordered j;
  j["run_id"] = r.run_id;
  j["batch_count"] = r.batch_count;
  j["batch_size"] = r.batch_size;
  j["t_inf"] = r.t_inf;
  j["t_mean_inf"] = r.t_mean_inf;
  j["t_test"] = opt(r.t_test);
  j["w_mean_inf"] = r.w_mean_inf;
  j["wm_inf"] = r.wm_inf;
  j["empty_batch_count"] = r.empty_batch_count;
  j["idle_power"] = opt(r.idle_power);
  j["top1"] = opt(r.top1);
  j["top5"] = opt(r.top5);
  j["clock_offset"] = r.clock_offset;
  j["clock_dispersion"] = r.clock_dispersion;
  ordered batches = ordered::array();
  for (const auto& b : r.per_batch) {
    ordered e;
    e["index"] = b.index;
    e["duration_s"] = b.duration_s;
    e["w_mean"] = opt(b.w_mean);
    e["sample_count"] = b.sample_count;
    batches.push_back(std::move(e));
  }
  j["per_batch"] = std::move(batches);
  return j.dump(2) + "\n";
}

AggregateReport parse_report(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    AggregateReport r;
    r.run_id = j.at("run_id").get<std::string>();
    r.batch_count = j.at("batch_count").get<std::uint64_t>();
    r.batch_size = j.at("batch_size").get<std::uint64_t>();
    r.t_inf = j.at("t_inf").get<double>();
    r.t_mean_inf = j.at("t_mean_inf").get<double>();
    r.t_test = get_opt<double>(j, "t_test");
    r.w_mean_inf = j.at("w_mean_inf").get<double>();
    r.wm_inf = j.at("wm_inf").get<double>();
    r.empty_batch_count = j.at("empty_batch_count").get<std::size_t>();
    r.idle_power = get_opt<double>(j, "idle_power");
    r.top1 = get_opt<double>(j, "top1");
    r.top5 = get_opt<double>(j, "top5");
    r.clock_offset = j.value("clock_offset", 0.0);
    r.clock_dispersion = j.value("clock_dispersion", 0.0);
    for (const auto& e : j.at("per_batch")) {
      r.per_batch.push_back({e.at("index").get<std::uint64_t>(), e.at("duration_s").get<double>(),
                             get_opt<double>(e, "w_mean"), e.at("sample_count").get<std::size_t>()});
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(ErrorCode::MalformedLine, fmt::format("report: {}", e.what()));
  }
}

}  // namespace edgemeter
