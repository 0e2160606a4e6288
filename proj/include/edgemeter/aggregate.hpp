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
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "edgemeter/measurement.hpp"
#include "edgemeter/monitor.hpp"

namespace edgemeter {

struct Timing {
  double t_inf = 0.0;       // s, sum of batch durations
  double t_mean_inf = 0.0;  // s, t_inf / N
  std::optional<double> t_test;  // s, absent without both test labels
};

/// Interval timing. `batch_count` must equal the number of intervals and be
/// at least one (AnalysisError NoIntervals / ManifestMismatch otherwise).
Timing compute_timing(std::span<const BatchInterval> intervals, const std::optional<TestWindow>& window,
                      std::uint64_t batch_count);

/// Power samples of one batch: every sample with start <= t <= end.
struct BatchPower {
  std::uint64_t index = 0;
  double duration_s = 0.0;
  std::vector<double> watts;
  std::optional<double> mean;  // absent when no sample fell inside
};

/// Assigns samples to intervals by inclusive time containment. Samples may
/// come in any order; they are put in a canonical order first so the
/// result does not depend on input order. Samples outside every interval
/// are dropped.
std::vector<BatchPower> align_power(std::span<const PowerSample> samples,
                                    std::span<const BatchInterval> intervals);

struct Energy {
  double w_mean_inf = 0.0;  // W, mean over non-empty batch means
  double wm_inf = 0.0;      // watt-minutes, w_mean_inf * t_inf / 60
  std::size_t non_empty_batches = 0;
  std::size_t empty_batches = 0;
};

/// Throws AnalysisError(AllBatchesEmpty) when no batch has a sample.
Energy compute_energy(std::span<const BatchPower> batches, double t_inf);

/// Fraction of results whose ground-truth class ranks within the top k,
/// for each k. Ranking is by descending score, ties by ascending class
/// index; a result's class index minus `label_offset` is compared to the
/// ground truth. Throws AnalysisError(MissingGroundTruth) and
/// AnalysisError(TopKTooShort).
std::map<unsigned, double> score_topk(std::span<const InferenceResult> results,
                                      const std::map<std::string, std::int64_t>& ground_truth,
                                      const std::set<unsigned>& ks = {1, 5}, std::int64_t label_offset = 0);

/// 1-based rank of `truth` under the tie rule above, or nullopt when absent.
std::optional<std::size_t> rank_of(const InferenceResult& result, std::int64_t truth,
                                   std::int64_t label_offset = 0);

struct BatchSummary {
  std::uint64_t index = 0;
  double duration_s = 0.0;
  std::optional<double> w_mean;
  std::size_t sample_count = 0;

  bool operator==(const BatchSummary&) const = default;
};

struct AggregateReport {
  std::string run_id;
  std::uint64_t batch_count = 0;
  std::uint64_t batch_size = 0;
  double t_inf = 0.0;
  double t_mean_inf = 0.0;
  std::optional<double> t_test;
  double w_mean_inf = 0.0;
  double wm_inf = 0.0;
  std::vector<BatchSummary> per_batch;
  std::size_t empty_batch_count = 0;
  std::optional<double> idle_power;
  std::optional<double> top1;
  std::optional<double> top5;
  double clock_offset = 0.0;
  double clock_dispersion = 0.0;

  bool operator==(const AggregateReport&) const = default;
};

struct ReportInputs {
  std::optional<std::vector<InferenceResult>> results;
  std::optional<std::map<std::string, std::int64_t>> ground_truth;
  std::int64_t label_offset = 0;
  std::optional<TimeRange> idle_window;
};

/// Every analysis output for one run. Accuracy appears only when both
/// results and ground truth are given; top-5 additionally needs at least
/// five ranked classes per result.
AggregateReport build_report(const RunManifest& manifest, std::span<const PowerSample> samples,
                             const EventLog& events, const ReportInputs& inputs = {});

/// Loads the files a manifest names and builds the report.
AggregateReport build_report_from_files(const RunManifest& manifest, const ReportInputs& inputs = {});

std::string serialize_report(const AggregateReport& report);
AggregateReport parse_report(std::string_view json);

}  // namespace edgemeter
