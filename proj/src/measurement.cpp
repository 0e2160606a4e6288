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

#include "edgemeter/measurement.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "edgemeter/error.hpp"

namespace edgemeter {

namespace {

constexpr std::int64_t kMicrosPerSecond = 1'000'000;
constexpr Micros kMonotonicSlack{1000};

struct Line {
  std::size_t number;  // 1-based
  std::string_view text;
};

// Splits on '\n', drops a trailing '\r', skips blank lines and `#` comments.
std::vector<Line> data_lines(std::string_view content) {
  std::vector<Line> lines;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    ++number;
    std::size_t eol = content.find('\n', pos);
    if (eol == std::string_view::npos) eol = content.size();
    std::string_view text = content.substr(pos, eol - pos);
    if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
    pos = eol + 1;
    if (text.empty() || text.front() == '#') continue;
    lines.push_back({number, text});
  }
  return lines;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = text.find(sep, pos);
    if (next == std::string_view::npos) {
      fields.push_back(text.substr(pos));
      return fields;
    }
    fields.push_back(text.substr(pos, next - pos));
    pos = next + 1;
  }
}

[[noreturn]] void malformed(std::size_t line, const std::string& why) {
  throw ParseError(ErrorCode::MalformedLine,
                   fmt::format("line {}: {}", line, why),
                   static_cast<std::int64_t>(line));
}

std::optional<std::uint64_t> parse_canonical_uint(std::string_view text) {
  if (text.empty() || (text.size() > 1 && text.front() == '0')) return std::nullopt;
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::optional<std::int64_t> parse_int(std::string_view text) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    return std::nullopt;
  }
  return value;
}

double non_negative_field(std::string_view text, std::size_t line, const char* name) {
  auto v = parse_double(text);
  if (!v || *v < 0.0) malformed(line, fmt::format("bad {} '{}'", name, text));
  return *v;
}

EventLog pair_events_impl(std::vector<EventMark> events,
                          const std::vector<std::size_t>& line_numbers) {
  EventLog log;
  std::map<std::uint64_t, std::optional<Timestamp>> starts;
  std::map<std::uint64_t, std::optional<Timestamp>> ends;
  std::optional<Timestamp> test_start;
  std::optional<Timestamp> test_end;

  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    const auto line = static_cast<std::int64_t>(line_numbers[i]);
    auto label = parse_label(e.label);
    if (!label) {
      throw ParseError(ErrorCode::UnknownLabel,
                       fmt::format("line {}: unknown label '{}'", line, e.label), line);
    }
    auto set_once = [&](std::optional<Timestamp>& slot) {
      if (slot) {
        throw ParseError(ErrorCode::DuplicateLabel,
                         fmt::format("line {}: duplicate label '{}'", line, e.label), line);
      }
      slot = e.t;
    };
    switch (label->kind) {
      case LabelKind::TestStart: set_once(test_start); break;
      case LabelKind::TestEnd: set_once(test_end); break;
      case LabelKind::BatchStart: set_once(starts[label->batch]); break;
      case LabelKind::BatchEnd: set_once(ends[label->batch]); break;
    }
  }

  // Smallest unpaired index wins so the error is deterministic.
  std::set<std::uint64_t> indices;
  for (const auto& [i, t] : starts) indices.insert(i);
  for (const auto& [i, t] : ends) indices.insert(i);
  for (std::uint64_t i : indices) {
    if (!starts[i] || !ends[i]) {
      throw ParseError(ErrorCode::UnpairedLabel,
                       fmt::format("batch {} has a {} label but no {} label", i,
                                   starts[i] ? "start" : "end", starts[i] ? "end" : "start"),
                       static_cast<std::int64_t>(i));
    }
    if (*ends[i] < *starts[i]) {
      throw ParseError(ErrorCode::InvertedInterval,
                       fmt::format("batch {} ends before it starts", i),
                       static_cast<std::int64_t>(i));
    }
    log.intervals.push_back({i, *starts[i], *ends[i]});
  }

  std::vector<const BatchInterval*> by_time;
  for (const auto& iv : log.intervals) by_time.push_back(&iv);
  std::sort(by_time.begin(), by_time.end(), [](const auto* a, const auto* b) {
    return a->start != b->start ? a->start < b->start : a->index < b->index;
  });
  for (std::size_t k = 1; k < by_time.size(); ++k) {
    const auto* a = by_time[k - 1];
    const auto* b = by_time[k];
    if (b->start < a->end) {
      auto lo = std::min(a->index, b->index);
      auto hi = std::max(a->index, b->index);
      throw ParseError(ErrorCode::OverlappingIntervals,
                       fmt::format("batches {} and {} overlap", lo, hi),
                       static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi));
    }
  }

  if (test_start && test_end) log.test_window = TestWindow{*test_start, *test_end};
  log.events = std::move(events);
  return log;
}

}  // namespace

Timestamp timestamp_from_seconds(double seconds) {
  return Timestamp{Micros{std::llround(seconds * kMicrosPerSecond)}};
}

double to_seconds(Timestamp t) { return to_seconds(t.time_since_epoch()); }

double to_seconds(Micros d) {
  // Split keeps the integral part exact for large epoch values.
  const auto us = d.count();
  const auto whole = us / kMicrosPerSecond;
  const auto frac = us % kMicrosPerSecond;
  return static_cast<double>(whole) + static_cast<double>(frac) / kMicrosPerSecond;
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  const auto dot = text.find('.');
  std::string_view whole = text.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if (whole.empty() || whole.size() > 12) return std::nullopt;
  if (dot != std::string_view::npos && frac.empty()) return std::nullopt;
  auto all_digits = [](std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  if (!all_digits(whole) || !all_digits(frac)) return std::nullopt;

  std::int64_t us = 0;
  for (char c : whole) us = us * 10 + (c - '0');
  us *= kMicrosPerSecond;
  std::int64_t frac_us = 0;
  for (std::size_t i = 0; i < 6; ++i) {
    frac_us = frac_us * 10 + (i < frac.size() ? frac[i] - '0' : 0);
  }
  if (frac.size() > 6 && frac[6] >= '5') ++frac_us;
  return Timestamp{Micros{us + frac_us}};
}

std::string format_timestamp(Timestamp t) {
  const auto us = t.time_since_epoch().count();
  return fmt::format("{}.{:06d}", us / kMicrosPerSecond, us % kMicrosPerSecond);
}

bool is_consistent(const PowerSample& s) {
  return std::abs(s.power - s.current * s.voltage) <= 0.01 * std::max(s.power, 0.1);
}

std::optional<EventLabel> parse_label(std::string_view text) {
  if (text == "test_start") return EventLabel{LabelKind::TestStart, 0};
  if (text == "test_end") return EventLabel{LabelKind::TestEnd, 0};
  constexpr std::string_view kStart = "inf_start_batch_";
  constexpr std::string_view kEnd = "inf_end_batch_";
  LabelKind kind;
  std::string_view rest;
  if (text.starts_with(kStart)) {
    kind = LabelKind::BatchStart;
    rest = text.substr(kStart.size());
  } else if (text.starts_with(kEnd)) {
    kind = LabelKind::BatchEnd;
    rest = text.substr(kEnd.size());
  } else {
    return std::nullopt;
  }
  auto index = parse_canonical_uint(rest);
  if (!index) return std::nullopt;
  return EventLabel{kind, *index};
}

std::string format_label(const EventLabel& label) {
  switch (label.kind) {
    case LabelKind::TestStart: return "test_start";
    case LabelKind::TestEnd: return "test_end";
    case LabelKind::BatchStart: return fmt::format("inf_start_batch_{}", label.batch);
    case LabelKind::BatchEnd: return fmt::format("inf_end_batch_{}", label.batch);
  }
  return {};
}

std::vector<PowerSample> parse_power_file(std::string_view content) {
  std::vector<PowerSample> samples;
  for (const auto& [number, text] : data_lines(content)) {
    auto fields = split(text, ',');
    if (fields.size() != 4) malformed(number, fmt::format("expected 4 fields, got {}", fields.size()));
    auto t = parse_timestamp(fields[0]);
    if (!t) malformed(number, fmt::format("bad time '{}'", fields[0]));
    PowerSample s{*t, non_negative_field(fields[1], number, "current"),
                  non_negative_field(fields[2], number, "voltage"),
                  non_negative_field(fields[3], number, "power")};
    if (!samples.empty() && s.t < samples.back().t - kMonotonicSlack) {
      throw ParseError(ErrorCode::NonMonotonicTime,
                       fmt::format("line {}: time goes backwards by more than 1 ms", number),
                       static_cast<std::int64_t>(number));
    }
    samples.push_back(s);
  }
  return samples;
}

std::string format_power_line(const PowerSample& s) {
  return fmt::format("{},{:.6f},{:.6f},{:.6f}\n", format_timestamp(s.t), s.current, s.voltage,
                     s.power);
}

std::string serialize_power_file(const std::vector<PowerSample>& samples) {
  std::string out;
  for (const auto& s : samples) out += format_power_line(s);
  return out;
}

EventLog pair_events(std::vector<EventMark> events) {
  std::vector<std::size_t> numbers(events.size());
  for (std::size_t i = 0; i < numbers.size(); ++i) numbers[i] = i + 1;
  return pair_events_impl(std::move(events), numbers);
}

EventLog parse_events_file(std::string_view content) {
  std::vector<EventMark> events;
  std::vector<std::size_t> numbers;
  for (const auto& [number, text] : data_lines(content)) {
    auto fields = split(text, ',');
    if (fields.size() != 2) malformed(number, fmt::format("expected 2 fields, got {}", fields.size()));
    auto t = parse_timestamp(fields[1]);
    if (!t) malformed(number, fmt::format("bad time '{}'", fields[1]));
    events.push_back({std::string(fields[0]), *t});
    numbers.push_back(number);
  }
  return pair_events_impl(std::move(events), numbers);
}

std::string format_event_line(const EventMark& e) {
  return fmt::format("{},{}\n", e.label, format_timestamp(e.t));
}

std::string serialize_events_file(const std::vector<EventMark>& events) {
  std::string out;
  for (const auto& e : events) out += format_event_line(e);
  return out;
}

std::vector<InferenceResult> parse_results_file(std::string_view content) {
  std::vector<InferenceResult> results;
  std::optional<std::size_t> k;
  for (const auto& [number, text] : data_lines(content)) {
    auto fields = split(text, ',');
    if (fields.size() < 3 || fields.size() % 2 == 0) {
      malformed(number, "expected sample_id followed by (index,score) pairs");
    }
    const std::size_t line_k = (fields.size() - 1) / 2;
    if (!k) k = line_k;
    if (*k != line_k) malformed(number, fmt::format("expected K={}, got {}", *k, line_k));
    if (fields[0].empty()) malformed(number, "empty sample id");

    InferenceResult r{std::string(fields[0]), {}};
    std::set<std::int64_t> seen;
    for (std::size_t j = 0; j < line_k; ++j) {
      auto index = parse_int(fields[1 + 2 * j]);
      auto score = parse_double(fields[2 + 2 * j]);
      if (!index || !score) malformed(number, fmt::format("bad rank {} entry", j + 1));
      if (!seen.insert(*index).second) malformed(number, fmt::format("class {} repeated", *index));
      if (!r.topk.empty() && *score > r.topk.back().score) {
        malformed(number, "scores must be non-increasing");
      }
      r.topk.push_back({*index, *score});
    }
    results.push_back(std::move(r));
  }
  return results;
}

std::string format_result_line(const InferenceResult& r) {
  std::string line = r.sample_id;
  for (const auto& cs : r.topk) {
    line += fmt::format(",{},{}", cs.class_index, format_double(cs.score));
  }
  line += '\n';
  return line;
}

std::string serialize_results_file(const std::vector<InferenceResult>& results) {
  std::string out;
  for (const auto& r : results) out += format_result_line(r);
  return out;
}

std::map<std::string, std::int64_t> parse_ground_truth(std::string_view content) {
  std::map<std::string, std::int64_t> truth;
  for (const auto& [number, text] : data_lines(content)) {
    std::istringstream in{std::string(text)};
    std::string id, label, extra;
    if (!(in >> id >> label) || (in >> extra)) malformed(number, "expected 'sample_id label_index'");
    auto index = parse_int(label);
    if (!index) malformed(number, fmt::format("bad label index '{}'", label));
    if (!truth.emplace(id, *index).second) malformed(number, fmt::format("duplicate sample '{}'", id));
  }
  return truth;
}

std::string serialize_manifest(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["run_id"] = m.run_id;
  j["batch_count"] = m.batch_count;
  j["batch_size"] = m.batch_size;
  j["device_name"] = m.device_name;
  j["model_name"] = m.model_name;
  j["clock_offset"] = m.clock_offset;
  j["clock_rtt"] = m.clock_rtt;
  j["clock_dispersion"] = m.clock_dispersion;
  j["probe_count"] = m.probe_count;
  j["planned_batch_count"] = m.planned_batch_count;
  j["power_file"] = m.power_file.string();
  j["events_file"] = m.events_file.string();
  j["results_file"] = m.results_file ? nlohmann::ordered_json(m.results_file->string())
                                     : nlohmann::ordered_json(nullptr);
  return j.dump(2) + "\n";
}

RunManifest parse_manifest(std::string_view content, const std::filesystem::path& base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(content);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(ErrorCode::MalformedLine, fmt::format("manifest: {}", e.what()));
  }
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  try {
    RunManifest m;
    m.run_id = j.at("run_id").get<std::string>();
    m.batch_count = j.at("batch_count").get<std::uint64_t>();
    m.batch_size = j.value("batch_size", std::uint64_t{1});
    m.device_name = j.value("device_name", std::string{});
    m.model_name = j.value("model_name", std::string{});
    m.clock_offset = j.value("clock_offset", 0.0);
    m.clock_rtt = j.value("clock_rtt", 0.0);
    m.clock_dispersion = j.value("clock_dispersion", 0.0);
    m.probe_count = j.value("probe_count", std::uint64_t{0});
    m.planned_batch_count = j.value("planned_batch_count", m.batch_count);
    m.power_file = resolve(j.at("power_file").get<std::string>());
    m.events_file = resolve(j.at("events_file").get<std::string>());
    if (j.contains("results_file") && !j["results_file"].is_null()) {
      m.results_file = resolve(j["results_file"].get<std::string>());
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(ErrorCode::MalformedLine, fmt::format("manifest: {}", e.what()));
  }
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::optional<double> parse_double(std::string_view text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() ||
      !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(ErrorCode::FileNotFound, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace edgemeter
