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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace edgemeter {

/// Wall-clock instant, microseconds since the Unix epoch. Text files carry
/// it as decimal seconds with exactly six fractional digits.
using Timestamp = std::chrono::sys_time<std::chrono::microseconds>;
using Micros = std::chrono::microseconds;

Timestamp timestamp_from_seconds(double seconds);
double to_seconds(Timestamp t);
double to_seconds(Micros d);

/// Parses `123.456789`; more than six fractional digits are rounded to the
/// nearest microsecond. Returns nullopt for anything else (sign, exponent,
/// empty, non-digits).
std::optional<Timestamp> parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);

struct PowerSample {
  Timestamp t;
  double current = 0.0;  // A
  double voltage = 0.0;  // V
  double power = 0.0;    // W, reported by the supply, not derived

  bool operator==(const PowerSample&) const = default;
};

/// True when the reported power agrees with current·voltage to within 1%
/// (floored at 1 mW absolute).
bool is_consistent(const PowerSample& s);

enum class LabelKind { TestStart, TestEnd, BatchStart, BatchEnd };

struct EventLabel {
  LabelKind kind = LabelKind::TestStart;
  std::uint64_t batch = 0;  // only meaningful for BatchStart / BatchEnd

  bool operator==(const EventLabel&) const = default;
};

/// Accepts exactly `test_start`, `test_end`, `inf_start_batch_<i>`,
/// `inf_end_batch_<i>` with i in canonical decimal (no sign, no leading 0s).
std::optional<EventLabel> parse_label(std::string_view text);
std::string format_label(const EventLabel& label);

struct EventMark {
  std::string label;
  Timestamp t;

  bool operator==(const EventMark&) const = default;
};

struct BatchInterval {
  std::uint64_t index = 0;
  Timestamp start;
  Timestamp end;

  Micros duration() const { return end - start; }
  bool operator==(const BatchInterval&) const = default;
};

struct TestWindow {
  Timestamp start;
  Timestamp end;
};

struct EventLog {
  std::vector<EventMark> events;            // file order
  std::vector<BatchInterval> intervals;     // sorted by index
  std::optional<TestWindow> test_window;    // when both test labels exist
};

struct ClassScore {
  std::int64_t class_index = 0;
  double score = 0.0;

  bool operator==(const ClassScore&) const = default;
};

struct InferenceResult {
  std::string sample_id;
  std::vector<ClassScore> topk;  // descending score

  bool operator==(const InferenceResult&) const = default;
};

struct RunManifest {
  std::string run_id;
  std::uint64_t batch_count = 0;
  std::uint64_t batch_size = 1;
  std::string device_name;
  std::string model_name;
  double clock_offset = 0.0;      // s, DUT minus monitor
  double clock_rtt = 0.0;         // s
  double clock_dispersion = 0.0;  // s
  std::uint64_t probe_count = 0;
  std::uint64_t planned_batch_count = 0;  // as announced by the agent
  std::filesystem::path power_file;
  std::filesystem::path events_file;
  std::optional<std::filesystem::path> results_file;

  bool operator==(const RunManifest&) const = default;
};

// --- power file: `time_s,current_a,voltage_v,power_w` ---------------------

std::vector<PowerSample> parse_power_file(std::string_view content);
std::string format_power_line(const PowerSample& s);
std::string serialize_power_file(const std::vector<PowerSample>& samples);

// --- events file: `label,time_s` -------------------------------------------

/// Builds the interval list from already-parsed marks. Used by the parser
/// and by anything holding events in memory.
EventLog pair_events(std::vector<EventMark> events);
EventLog parse_events_file(std::string_view content);
std::string format_event_line(const EventMark& e);
std::string serialize_events_file(const std::vector<EventMark>& events);

// --- results file: `sample_id,idx1,score1,...,idxK,scoreK` -----------------

std::vector<InferenceResult> parse_results_file(std::string_view content);
std::string format_result_line(const InferenceResult& r);
std::string serialize_results_file(const std::vector<InferenceResult>& results);

// --- ground truth: `sample_id label_index` ---------------------------------

std::map<std::string, std::int64_t> parse_ground_truth(std::string_view content);

// --- run manifest (JSON) ----------------------------------------------------

std::string serialize_manifest(const RunManifest& m);
/// Relative paths inside the manifest are resolved against `base_dir`.
RunManifest parse_manifest(std::string_view content,
                           const std::filesystem::path& base_dir = {});

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);
std::optional<double> parse_double(std::string_view text);

std::string read_file(const std::filesystem::path& path);

}  // namespace edgemeter
