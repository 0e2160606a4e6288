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
#include <random>

#include <gtest/gtest.h>

#include "edgemeter/error.hpp"
#include "test_util.hpp"

namespace edgemeter {
namespace {

using testing::at_us;
using testing::code_of;

TEST(Timestamp, ParsesSixDigits) {
  EXPECT_EQ(parse_timestamp("1700000000.123456"), at_us(1700000000123456));
  EXPECT_EQ(parse_timestamp("5"), at_us(5000000));
  EXPECT_EQ(parse_timestamp("5.1"), at_us(5100000));
  EXPECT_EQ(parse_timestamp("0.0000004"), at_us(0));
  EXPECT_EQ(parse_timestamp("0.0000005"), at_us(1));
  EXPECT_EQ(parse_timestamp("1.9999996"), at_us(2000000));
}

TEST(Timestamp, RejectsJunk) {
  for (const char* bad : {"", "-1.0", "+1", "1e5", "1.", ".5", "1.2.3", "abc", " 1", "nan"}) {
    EXPECT_FALSE(parse_timestamp(bad)) << bad;
  }
}

TEST(Timestamp, FormatRoundTripsRandom) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::int64_t> us(0, 4'000'000'000'000'000LL);
  for (int i = 0; i < 10000; ++i) {
    const auto t = at_us(us(rng));
    const auto text = format_timestamp(t);
    ASSERT_EQ(text.size() - text.find('.'), 7u) << text;
    ASSERT_EQ(parse_timestamp(text), t) << text;
  }
  EXPECT_EQ(format_timestamp(at_us(1)), "0.000001");
}

TEST(Label, CanonicalForms) {
  EXPECT_EQ(parse_label("test_start")->kind, LabelKind::TestStart);
  EXPECT_EQ(parse_label("test_end")->kind, LabelKind::TestEnd);
  const auto b = parse_label("inf_start_batch_42");
  ASSERT_TRUE(b);
  EXPECT_EQ(b->kind, LabelKind::BatchStart);
  EXPECT_EQ(b->batch, 42u);
  EXPECT_EQ(parse_label("inf_end_batch_0")->kind, LabelKind::BatchEnd);
  for (const char* bad : {"inf_start_batch_01", "inf_start_batch_", "inf_start_batch_-1", "Test_start",
                          "inf_end_batch_1x", "inf_mid_batch_1", ""}) {
    EXPECT_FALSE(parse_label(bad)) << bad;
  }
  for (const auto& l : {EventLabel{LabelKind::BatchStart, 7}, EventLabel{LabelKind::BatchEnd, 0},
                        EventLabel{LabelKind::TestStart, 0}}) {
    EXPECT_EQ(parse_label(format_label(l)), l);
  }
}

TEST(PowerFile, ParsesAndSkipsCommentsAndBlankLines) {
  const auto samples = parse_power_file(
      "# header\n"
      "\n"
      "10.000000,0.500000,5.000000,2.500000\r\n"
      "10.100000,0.600000,5.000000,3.000000\n");
  ASSERT_EQ(samples.size(), 2u);
  EXPECT_EQ(samples[1].t, at_us(10'100'000));
  EXPECT_DOUBLE_EQ(samples[1].power, 3.0);
  EXPECT_TRUE(is_consistent(samples[0]));
}

TEST(PowerFile, RoundTrip) {
  std::vector<PowerSample> samples;
  for (int i = 0; i < 50; ++i) {
    samples.push_back({at_us(1'000'000 + i * 100'000), (250 + i) / 1000.0, 5.01, (1250 + 5 * i) / 1000.0});
  }
  EXPECT_EQ(parse_power_file(serialize_power_file(samples)), samples);
  EXPECT_EQ(format_power_line(samples[0]), "1.000000,0.250000,5.010000,1.250000\n");
}

TEST(PowerFile, Errors) {
  std::int64_t line = 0;
  EXPECT_EQ(code_of([] { parse_power_file("1.0,0.1,5.0\n"); }, &line), ErrorCode::MalformedLine);
  EXPECT_EQ(line, 1);
  EXPECT_EQ(code_of([] { parse_power_file("1.0,0.1,5.0,0.5\n1.1,-0.1,5.0,0.5\n"); }, &line),
            ErrorCode::MalformedLine);
  EXPECT_EQ(line, 2);
  EXPECT_EQ(code_of([] { parse_power_file("2.0,0.1,5.0,0.5\n1.9,0.1,5.0,0.5\n"); }, &line),
            ErrorCode::NonMonotonicTime);
  EXPECT_EQ(line, 2);
  // Jitter within a millisecond is tolerated.
  EXPECT_NO_THROW(parse_power_file("2.000500,0.1,5.0,0.5\n2.000000,0.1,5.0,0.5\n"));
}

std::string events_text(const std::vector<std::pair<std::string, double>>& rows) {
  std::string out;
  for (const auto& [label, t] : rows) out += label + "," + format_timestamp(timestamp_from_seconds(t)) + "\n";
  return out;
}

TEST(EventsFile, PairsIntervals) {
  const auto log = parse_events_file(events_text({{"test_start", 0.0},
                                                  {"inf_start_batch_1", 3.0},
                                                  {"inf_start_batch_0", 1.0},
                                                  {"inf_end_batch_0", 2.0},
                                                  {"inf_end_batch_1", 4.5},
                                                  {"test_end", 5.0}}));
  ASSERT_EQ(log.intervals.size(), 2u);
  EXPECT_EQ(log.intervals[0].index, 0u);
  EXPECT_EQ(log.intervals[1].duration(), Micros{1'500'000});
  ASSERT_TRUE(log.test_window);
  EXPECT_EQ(log.test_window->end, at_us(5'000'000));
  EXPECT_EQ(log.events.size(), 6u);
}

TEST(EventsFile, TouchingIntervalsAreAllowed) {
  EXPECT_NO_THROW(parse_events_file(events_text(
      {{"inf_start_batch_0", 1.0}, {"inf_end_batch_0", 2.0}, {"inf_start_batch_1", 2.0}, {"inf_end_batch_1", 3.0}})));
}

TEST(EventsFile, Errors) {
  std::int64_t d = 0;
  std::int64_t d2 = 0;
  EXPECT_EQ(code_of([] { parse_events_file("inf_begin_batch_0,1.0\n"); }, &d), ErrorCode::UnknownLabel);
  EXPECT_EQ(d, 1);
  EXPECT_EQ(code_of([] { parse_events_file("inf_start_batch_0\n"); }), ErrorCode::MalformedLine);
  EXPECT_EQ(code_of([] {
              parse_events_file("inf_start_batch_0,1.0\ninf_end_batch_0,2.0\ninf_start_batch_0,3.0\n");
            }, &d),
            ErrorCode::DuplicateLabel);
  EXPECT_EQ(d, 3);
  EXPECT_EQ(code_of([] { parse_events_file("inf_start_batch_3,1.0\ninf_end_batch_5,2.0\n"); }, &d),
            ErrorCode::UnpairedLabel);
  EXPECT_EQ(d, 3);
  EXPECT_EQ(code_of([] { parse_events_file("inf_start_batch_0,2.0\ninf_end_batch_0,1.0\n"); }, &d),
            ErrorCode::InvertedInterval);
  EXPECT_EQ(d, 0);
  EXPECT_EQ(code_of([] {
              parse_events_file(events_text({{"inf_start_batch_2", 1.0},
                                             {"inf_end_batch_2", 3.0},
                                             {"inf_start_batch_1", 2.0},
                                             {"inf_end_batch_1", 4.0}}));
            }, &d, &d2),
            ErrorCode::OverlappingIntervals);
  EXPECT_EQ(d, 1);
  EXPECT_EQ(d2, 2);
}

TEST(EventsFile, SerializeRoundTrip) {
  std::vector<EventMark> events = {{"test_start", at_us(1)}, {"inf_start_batch_0", at_us(5)},
                                   {"inf_end_batch_0", at_us(9)}, {"test_end", at_us(12)}};
  EXPECT_EQ(parse_events_file(serialize_events_file(events)).events, events);
}

TEST(ResultsFile, RoundTripShortestDoubles) {
  std::vector<InferenceResult> results = {
      {"img_0001", {{65, 0.1 + 0.2}, {3, 0.25}, {900, 1e-9}}},
      {"img_0002", {{1, 0.5}, {2, 0.5}, {0, 0.0}}},
  };
  const auto text = serialize_results_file(results);
  EXPECT_NE(text.find("0.30000000000000004"), std::string::npos);
  EXPECT_EQ(parse_results_file(text), results);
}

TEST(ResultsFile, Errors) {
  EXPECT_EQ(code_of([] { parse_results_file("a,1,0.5,2,0.6\n"); }), ErrorCode::MalformedLine);
  EXPECT_EQ(code_of([] { parse_results_file("a,1,0.5,1,0.4\n"); }), ErrorCode::MalformedLine);
  EXPECT_EQ(code_of([] { parse_results_file("a,1,0.5,2,0.4\nb,1,0.5\n"); }), ErrorCode::MalformedLine);
  EXPECT_EQ(code_of([] { parse_results_file("a,1,0.5,2\n"); }), ErrorCode::MalformedLine);
}

TEST(GroundTruth, Parses) {
  const auto truth = parse_ground_truth("a 3\n# c\nb 0\n");
  EXPECT_EQ(truth.at("a"), 3);
  EXPECT_EQ(truth.size(), 2u);
  EXPECT_EQ(code_of([] { parse_ground_truth("a 3\na 4\n"); }), ErrorCode::MalformedLine);
}

TEST(Manifest, RoundTripAndRelativePaths) {
  RunManifest m;
  m.run_id = "r1";
  m.batch_count = 10;
  m.batch_size = 4;
  m.device_name = "rpi4";
  m.model_name = "mobilenet_v2";
  m.clock_offset = -0.0123;
  m.clock_rtt = 0.0004;
  m.clock_dispersion = 0.0001;
  m.probe_count = 8;
  m.planned_batch_count = 10;
  m.power_file = "/data/power.csv";
  m.events_file = "events.csv";
  const auto parsed = parse_manifest(serialize_manifest(m), "/runs/r1");
  EXPECT_EQ(parsed.events_file, std::filesystem::path("/runs/r1/events.csv"));
  EXPECT_EQ(parsed.power_file, m.power_file);
  EXPECT_FALSE(parsed.results_file);
  auto expected = m;
  expected.events_file = "/runs/r1/events.csv";
  EXPECT_EQ(parsed, expected);
}

TEST(Doubles, ShortestRoundTrip) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = d(rng);
    ASSERT_EQ(parse_double(format_double(v)), v);
  }
  EXPECT_FALSE(parse_double("inf"));
  EXPECT_FALSE(parse_double("1.0x"));
}

TEST(Files, MissingFile) {
  EXPECT_EQ(code_of([] { read_file("/nonexistent/edgemeter/file"); }), ErrorCode::FileNotFound);
}

}  // namespace
}  // namespace edgemeter
