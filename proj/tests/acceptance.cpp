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

// Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero when
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <unistd.h>

#include "edgemeter/agent.hpp"
#include "edgemeter/aggregate.hpp"
#include "edgemeter/clock.hpp"
#include "edgemeter/error.hpp"
#include "edgemeter/modbus.hpp"
#include "edgemeter/monitor.hpp"
#include "edgemeter/predict.hpp"
#include "edgemeter/psu.hpp"
#include "edgemeter/timesync.hpp"

namespace fs = std::filesystem;
using namespace edgemeter;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& check) {
  const auto begin = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, fmt::format("threw: {}", e.what())};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
  if (!o.pass) ++failures;
  std::printf("%s %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / fmt::format("edgemeter-acceptance-{}-{}", ::getpid(), name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

// --- independent Eq. 2 recomputation ---------------------------------------

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, sep)) out.push_back(field);
  return out;
}

// Decimal seconds to integer microseconds without going through a double.
long long micros_of(const std::string& text) {
  const auto dot = text.find('.');
  long long whole = std::stoll(text.substr(0, dot));
  long long frac = 0;
  if (dot != std::string::npos) {
    std::string digits = text.substr(dot + 1);
    digits.resize(6, '0');
    frac = std::stoll(digits);
  }
  return whole * 1'000'000 + frac;
}

struct OracleResult {
  double w_mean = 0;
  double wm = 0;
};

OracleResult oracle_from_files(const fs::path& power_path, const fs::path& events_path) {
  std::vector<std::pair<long long, double>> samples;
  std::ifstream power(power_path);
  for (std::string line; std::getline(power, line);) {
    const auto f = split(line, ',');
    samples.emplace_back(micros_of(f[0]), std::strtod(f[3].c_str(), nullptr));
  }
  std::map<long long, long long> starts;
  std::map<long long, long long> ends;
  std::ifstream events(events_path);
  for (std::string line; std::getline(events, line);) {
    const auto f = split(line, ',');
    const auto& label = f[0];
    const auto us = micros_of(f[1]);
    if (label.rfind("inf_start_batch_", 0) == 0) starts[std::stoll(label.substr(16))] = us;
    if (label.rfind("inf_end_batch_", 0) == 0) ends[std::stoll(label.substr(14))] = us;
  }
  long long total_us = 0;
  double sum_of_means = 0;
  int non_empty = 0;
  for (const auto& [i, s] : starts) {
    const auto e = ends.at(i);
    total_us += e - s;
    double sum = 0;
    int n = 0;
    for (const auto& [t, w] : samples) {
      if (t >= s && t <= e) {
        sum += w;
        ++n;
      }
    }
    if (n > 0) {
      sum_of_means += sum / n;
      ++non_empty;
    }
  }
  OracleResult r;
  r.w_mean = sum_of_means / non_empty;
  r.wm = r.w_mean * (static_cast<double>(total_us) / 1e6) / 60.0;
  return r;
}

Outcome eq2_oracle() {
  const auto dir = scratch_dir("eq2");
  std::mt19937_64 rng(20240611);
  double worst = 0;
  for (int trace = 0; trace < 200; ++trace) {
    std::uniform_int_distribution<int> batches(1, 40);
    std::uniform_int_distribution<long long> gap(0, 800'000);
    std::uniform_int_distribution<long long> len(1'000, 3'000'000);
    std::uniform_real_distribution<double> watts(0.0, 25.0);
    const long long base = 1'700'000'000'000'000LL + static_cast<long long>(rng() % 1'000'000'000'000ULL);
    long long t = base;
    std::vector<EventMark> events{{"test_start", Timestamp{Micros{base}}}};
    std::vector<std::pair<long long, long long>> spans;
    const int n = batches(rng);
    for (int i = 0; i < n; ++i) {
      t += gap(rng);
      const long long s = t;
      t += len(rng);
      spans.emplace_back(s, t);
    }
    // Shuffle the event order in the file; pairing must not care.
    std::vector<EventMark> batch_events;
    for (int i = 0; i < n; ++i) {
      batch_events.push_back({fmt::format("inf_start_batch_{}", i), Timestamp{Micros{spans[i].first}}});
      batch_events.push_back({fmt::format("inf_end_batch_{}", i), Timestamp{Micros{spans[i].second}}});
    }
    std::shuffle(batch_events.begin(), batch_events.end(), rng);
    events.insert(events.end(), batch_events.begin(), batch_events.end());
    events.push_back({"test_end", Timestamp{Micros{t + 1}}});

    std::uniform_int_distribution<long long> step(1'000, 300'000);
    std::vector<PowerSample> samples;
    for (long long st = base - 500'000; st < t + 500'000; st += step(rng)) {
      const double w = watts(rng);
      samples.push_back({Timestamp{Micros{st}}, w / 5.0, 5.0, w});
    }
    // Samples exactly on interval edges.
    for (const auto& [s, e] : spans) {
      if (rng() % 2) samples.push_back({Timestamp{Micros{s}}, 0.3, 5.0, 1.5});
      if (rng() % 2) samples.push_back({Timestamp{Micros{e}}, 0.4, 5.0, 2.0});
    }
    samples.push_back({Timestamp{Micros{spans[0].first}}, 0.1, 5.0, 0.5});
    std::sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) { return a.t < b.t; });

    const auto power_path = dir / fmt::format("p{}.csv", trace);
    const auto events_path = dir / fmt::format("e{}.csv", trace);
    write_text(power_path, serialize_power_file(samples));
    write_text(events_path, serialize_events_file(events));

    RunManifest m;
    m.run_id = fmt::format("trace{}", trace);
    m.batch_count = static_cast<std::uint64_t>(n);
    m.power_file = power_path;
    m.events_file = events_path;
    const auto got = build_report_from_files(m);
    const auto want = oracle_from_files(power_path, events_path);
    worst = std::max({worst, rel_err(got.w_mean_inf, want.w_mean), rel_err(got.wm_inf, want.wm)});
  }
  fs::remove_all(dir);
  return {worst <= 1e-9, fmt::format("200 traces, max relative error {:.3e} (limit 1e-9)", worst)};
}

// --- square wave through sampler and files -----------------------------------

Outcome square_wave() {
  const auto dir = scratch_dir("square");
  const Timestamp t0 = timestamp_from_seconds(1'700'000'000.0);  // multiple of the 4 s period
  // The sampler starts at an arbitrary phase relative to the workload.
  ManualClock clock(t0 + Micros{37'000});
  SimulatedPsu psu(square_power(1.0, 3.0, 4.0), clock);
  PsuClient client(psu, RegisterMap::hm310p_community(), {}, clock);
  {
    Sampler sampler(client, clock, dir / "power.csv", Micros{100'000});
    sampler.run_until(t0 + Micros{42'000'000});
  }
  std::vector<EventMark> events{{"test_start", t0}};
  for (int i = 0; i < 10; ++i) {
    events.push_back({fmt::format("inf_start_batch_{}", i), t0 + Micros{(4LL * i + 2) * 1'000'000}});
    events.push_back({fmt::format("inf_end_batch_{}", i), t0 + Micros{(4LL * i + 4) * 1'000'000}});
  }
  events.push_back({"test_end", t0 + Micros{41'000'000}});
  write_text(dir / "events.csv", serialize_events_file(events));
  RunManifest m;
  m.run_id = "square";
  m.batch_count = 10;
  m.power_file = dir / "power.csv";
  m.events_file = dir / "events.csv";
  const auto r = build_report_from_files(m);
  fs::remove_all(dir);
  const double err = rel_err(r.wm_inf, 1.0);
  return {err <= 0.02, fmt::format("wm_inf {:.6f} wattmin, expected 1.0 within 2% (error {:.3f}%)", r.wm_inf, err * 100)};
}

// --- paper profiles ----------------------------------------------------------

DevicePowerProfile rpi() { return profile_from_run("rpi4", 640.0, 5000, 37.6, 2.643); }
DevicePowerProfile coral() { return profile_from_run("coral", 20.788, 5000, 1.543, 3.081); }
DevicePowerProfile jetson() { return profile_from_run("jetson_tftrt", 103.142, 5000, 13.630, 1.391); }

Outcome crossover_rpi_coral() {
  const auto r = crossover(rpi(), coral());
  if (!r) return {false, "no crossover"};
  const double err = rel_err(*r, 238.0);
  return {err <= 0.05, fmt::format("{:.2f} inf/min vs 238 (error {:+.2f}%, limit 5%)", *r, (*r / 238.0 - 1) * 100)};
}

Outcome crossover_jetson_coral() {
  const auto r = crossover(jetson(), coral());
  if (!r) return {false, "no crossover"};
  const double err = rel_err(*r, 853.0);
  return {err <= 0.10, fmt::format("{:.2f} inf/min vs 853 (error {:+.2f}%, limit 10%)", *r, (*r / 853.0 - 1) * 100)};
}

Outcome busy_fraction_jetson() {
  const auto j = jetson();
  const auto r = crossover(j, coral());
  if (!r) return {false, "no crossover"};
  const double busy = energy_at_rate(j, *r).busy_fraction * 100.0;
  return {std::abs(busy - 29.3) <= 2.0,
          fmt::format("{:.2f}% at {:.2f} inf/min vs 29.3% (limit 2 pp)", busy, *r)};
}

Outcome max_rate_arduino() {
  const auto arduino = profile_from_run("arduino", 57534.297, 5000, 61.879, 0.036);
  const auto mr = max_rate(DevicePowerProfile{"t", 11.509, 1.0, 0.0});
  const double e = energy_at_rate(arduino, 5.0).energy_per_minute;
  const double err = rel_err(e, 0.063);
  return {mr == 5 && max_rate(arduino) == 5 && err <= 0.15,
          fmt::format("max_rate {}, E(5) {:.5f} wattmin vs 0.063 (error {:+.2f}%, limit 15%)", mr, e,
                      (e / 0.063 - 1) * 100)};
}

// --- accuracy fixture ----------------------------------------------------------

struct FixtureRow {
  const char* line;     // results-file line, scores non-increasing
  const char* permuted; // same scores with equal-score entries reordered
  std::int64_t truth;
  int rank;             // 0 = not in top 5
};

Outcome accuracy_fixture() {
  const std::vector<FixtureRow> rows = {
      {"s00,1,0.9,2,0.05,3,0.03,4,0.01,5,0.01", "s00,1,0.9,2,0.05,3,0.03,5,0.01,4,0.01", 1, 1},
      {"s01,7,0.6,8,0.2,9,0.1,10,0.05,11,0.05", "s01,7,0.6,8,0.2,9,0.1,11,0.05,10,0.05", 8, 2},
      {"s02,7,0.6,8,0.2,9,0.1,10,0.05,11,0.05", "s02,7,0.6,8,0.2,9,0.1,11,0.05,10,0.05", 11, 5},
      {"s03,7,0.6,8,0.2,9,0.1,10,0.05,11,0.05", "s03,7,0.6,8,0.2,9,0.1,11,0.05,10,0.05", 10, 4},
      {"s04,3,0.5,4,0.5,5,0.0,6,0.0,7,0.0", "s04,4,0.5,3,0.5,7,0.0,6,0.0,5,0.0", 3, 1},
      {"s05,3,0.5,4,0.5,5,0.0,6,0.0,7,0.0", "s05,4,0.5,3,0.5,6,0.0,5,0.0,7,0.0", 4, 2},
      {"s06,3,0.5,4,0.5,5,0.0,6,0.0,7,0.0", "s06,4,0.5,3,0.5,7,0.0,5,0.0,6,0.0", 7, 5},
      {"s07,20,0.2,10,0.2,30,0.2,40,0.2,50,0.2", "s07,50,0.2,40,0.2,30,0.2,20,0.2,10,0.2", 10, 1},
      {"s08,20,0.2,10,0.2,30,0.2,40,0.2,50,0.2", "s08,30,0.2,50,0.2,10,0.2,40,0.2,20,0.2", 50, 5},
      {"s09,20,0.2,10,0.2,30,0.2,40,0.2,50,0.2", "s09,40,0.2,20,0.2,50,0.2,10,0.2,30,0.2", 30, 3},
      {"s10,1,0.9,2,0.05,3,0.03,4,0.01,5,0.01", "s10,1,0.9,2,0.05,3,0.03,4,0.01,5,0.01", 6, 0},
      {"s11,100,0.8,200,0.1,300,0.05,400,0.03,500,0.02", "s11,100,0.8,200,0.1,300,0.05,400,0.03,500,0.02", 100, 1},
      {"s12,100,0.8,200,0.1,300,0.05,400,0.03,500,0.02", "s12,100,0.8,200,0.1,300,0.05,400,0.03,500,0.02", 300, 3},
      {"s13,9,0.4,8,0.4,7,0.1,6,0.05,5,0.05", "s13,8,0.4,9,0.4,7,0.1,5,0.05,6,0.05", 9, 2},
      {"s14,9,0.4,8,0.4,7,0.1,6,0.05,5,0.05", "s14,8,0.4,9,0.4,7,0.1,5,0.05,6,0.05", 5, 4},
      {"s15,9,0.4,8,0.4,7,0.1,6,0.05,5,0.05", "s15,8,0.4,9,0.4,7,0.1,5,0.05,6,0.05", 8, 1},
      {"s16,0,1.0,1,0.0,2,0.0,3,0.0,4,0.0", "s16,0,1.0,4,0.0,3,0.0,2,0.0,1,0.0", 0, 1},
      {"s17,0,1.0,1,0.0,2,0.0,3,0.0,4,0.0", "s17,0,1.0,4,0.0,3,0.0,2,0.0,1,0.0", 4, 5},
      {"s18,12,0.7,13,0.3,14,0.0,15,0.0,16,0.0", "s18,12,0.7,13,0.3,16,0.0,15,0.0,14,0.0", 99, 0},
      {"s19,12,0.7,13,0.3,14,0.0,15,0.0,16,0.0", "s19,12,0.7,13,0.3,16,0.0,15,0.0,14,0.0", 12, 1},
  };
  std::string text;
  std::string permuted;
  std::map<std::string, std::int64_t> truth;
  int top1 = 0;
  int top5 = 0;
  for (const auto& r : rows) {
    text += std::string(r.line) + "\n";
    permuted += std::string(r.permuted) + "\n";
    truth[std::string(r.line).substr(0, 3)] = r.truth;
    top1 += r.rank == 1;
    top5 += r.rank >= 1 && r.rank <= 5;
  }
  const auto results = parse_results_file(text);
  const auto shuffled = parse_results_file(permuted);
  bool ranks_ok = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto want = rows[i].rank == 0 ? std::nullopt : std::optional<std::size_t>(rows[i].rank);
    ranks_ok = ranks_ok && rank_of(results[i], rows[i].truth) == want && rank_of(shuffled[i], rows[i].truth) == want;
  }
  const auto a = score_topk(results, truth);
  const auto b = score_topk(shuffled, truth);
  const double want1 = top1 / 20.0;
  const double want5 = top5 / 20.0;
  const bool pass = ranks_ok && a.at(1) == want1 && a.at(5) == want5 && b == a;
  return {pass, fmt::format("top1 {}/20 = {:.2f}, top5 {}/20 = {:.2f}, ranks {}, permuted ties {}", top1, a.at(1), top5,
                            a.at(5), ranks_ok ? "exact" : "WRONG", b == a ? "identical" : "DIFFER")};
}

// --- CRC and framing -----------------------------------------------------------

std::uint16_t crc_bitwise(const std::vector<std::uint8_t>& bytes) {
  std::uint16_t crc = 0xFFFF;
  for (auto b : bytes) {
    crc ^= b;
    for (int i = 0; i < 8; ++i) crc = (crc & 1) ? static_cast<std::uint16_t>((crc >> 1) ^ 0xA001) : crc >> 1;
  }
  return crc;
}

Outcome crc_framing() {
  const std::vector<std::uint8_t> body = {0x01, 0x03, 0x00, 0x00, 0x00, 0x01};
  const auto frame = modbus::read_holding_request(1, 0, 1);
  const bool vector_ok = modbus::crc16(body) == crc_bitwise(body) && crc_bitwise(body) == 0x0A84 &&
                         frame == std::vector<std::uint8_t>{0x01, 0x03, 0x00, 0x00, 0x00, 0x01, 0x84, 0x0A};
  int undetected = 0;
  int corruptions = 0;
  for (std::size_t pos = 0; pos < frame.size(); ++pos) {
    for (int v = 0; v < 256; ++v) {
      if (v == frame[pos]) continue;
      auto bad = frame;
      bad[pos] = static_cast<std::uint8_t>(v);
      ++corruptions;
      try {
        modbus::decode(bad);
        ++undetected;
      } catch (const TransportError& e) {
        if (e.code() != ErrorCode::CrcMismatch) ++undetected;
      }
    }
  }
  std::mt19937 rng(99);
  int mismatches = 0;
  for (int i = 0; i < 10'000; ++i) {
    std::vector<std::uint8_t> payload(rng() % 252);
    for (auto& b : payload) b = static_cast<std::uint8_t>(rng());
    const auto f = modbus::make_frame(static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng()), payload);
    const auto wire = modbus::encode(f);
    if (modbus::decode(wire) != f || crc_bitwise({wire.begin(), wire.end() - 2}) != f.crc) ++mismatches;
  }
  return {vector_ok && undetected == 0 && mismatches == 0,
          fmt::format("vector 0x{:04X} {}, {}/{} corruptions detected, {} round-trip mismatches in 10000",
                      modbus::crc16(body), vector_ok ? "ok" : "WRONG", corruptions - undetected, corruptions,
                      mismatches)};
}

// --- timesync ------------------------------------------------------------------

Outcome timesync_bound() {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> offset(-10.0, 10.0);
  std::exponential_distribution<double> leg(1.0 / 0.002);
  std::uniform_real_distribution<double> turnaround(0.0, 0.0005);
  SyncOptions options;
  options.max_dispersion = 1.0;  // delays here are wilder than the default tolerates
  double worst_ratio = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double o = offset(rng);
    double dut = 5000.0;
    const auto est = estimate_offset(
        [&] {
          dut += 0.01;
          const double up = leg(rng);
          const double turn = turnaround(rng);
          const double down = leg(rng);
          ProbeSample p{dut, dut + up - o, dut + up - o + turn, dut + up + turn + down};
          return p;
        },
        options);
    worst_ratio = std::max(worst_ratio, std::abs(est.offset - o) / (est.rtt / 2));
  }
  double dut = 7000.0;
  const auto sym = estimate_offset([&] {
    dut += 0.05;
    return ProbeSample{dut, dut + 0.003 - 0.1, dut + 0.0031 - 0.1, dut + 0.0061};
  });
  const bool exact = offset_micros(sym.offset) == Micros{100'000};
  return {worst_ratio <= 1.0 + 1e-9 && exact,
          fmt::format("worst |error|/(rtt/2) {:.4f} over 1000 trials; symmetric 100 ms -> {} us", worst_ratio,
                      offset_micros(sym.offset).count())};
}

// --- end-to-end loopback -------------------------------------------------------

Outcome end_to_end() {
  const auto dir = scratch_dir("e2e");
  fs::create_directories(dir / "dataset");
  SystemClock clock;

  // Plan five 300 ms batches on the monitor clock, 500 ms apart.
  const Timestamp base = clock.now() + Micros{400'000};
  const Micros batch_len{300'000};
  const Micros pitch{500'000};
  std::vector<std::pair<Timestamp, Timestamp>> busy;
  std::vector<std::pair<Timestamp, Timestamp>> planned;
  for (int i = 0; i < 5; ++i) {
    const auto s = base + i * pitch;
    planned.emplace_back(s, s + batch_len);
    busy.emplace_back(s - Micros{50'000}, s + batch_len + Micros{50'000});
  }
  const Timestamp test_start = base - Micros{100'000};
  const Timestamp test_end = planned.back().second + Micros{100'000};
  const Timestamp idle_from = test_end + Micros{200'000};
  const Timestamp idle_to = idle_from + Micros{400'000};

  SimulatedPsu psu(windowed_power(1.0, 3.0, busy), clock);
  PsuClient client(psu, RegisterMap::hm310p_community(), {}, clock);
  DirectoryRunSink sink(dir / "runs", dir / "power.csv");
  AgentServer server({"127.0.0.1", 0}, dir / "dataset", sink, clock);
  Sampler sampler(client, clock, dir / "power.csv", Micros{20'000});
  sampler.start();

  // The stub agent's clock runs 2.5 s ahead; its script is written in its own time.
  const Micros dut_ahead{2'500'000};
  OffsetClock dut(clock, dut_ahead);
  ScriptedRun script;
  script.hello = {"e2e", "stub", "sleep", 5, 4, std::nullopt};
  script.events.push_back({"test_start", test_start + dut_ahead});
  for (int i = 0; i < 5; ++i) {
    script.events.push_back({fmt::format("inf_start_batch_{}", i), planned[i].first + dut_ahead});
    script.events.push_back({fmt::format("inf_end_batch_{}", i), planned[i].second + dut_ahead});
  }
  script.events.push_back({"test_end", test_end + dut_ahead});
  std::map<std::string, std::int64_t> truth;
  for (int i = 0; i < 8; ++i) {
    const auto id = fmt::format("img{}", i);
    script.results.push_back({id, {{i, 0.6}, {i + 1, 0.2}, {i + 2, 0.1}, {i + 3, 0.05}, {i + 4, 0.05}}});
    // Ranks 1,1,1,1,2,3,4,not present.
    const std::int64_t offsets[] = {0, 0, 0, 0, 1, 2, 3, 9};
    truth[id] = i + offsets[i];
  }
  const auto recorded = replay_run(fmt::format("127.0.0.1:{}", server.port()), dut, script);

  clock.sleep_until(idle_to + Micros{200'000});
  const auto stats = sampler.stop();
  server.stop();

  const auto manifest_path = dir / "runs/e2e/manifest.json";
  const auto manifest = parse_manifest(read_file(manifest_path), manifest_path.parent_path());
  ReportInputs inputs;
  inputs.ground_truth = truth;
  inputs.idle_window = TimeRange{idle_from, idle_to};
  const auto r = build_report_from_files(manifest, inputs);

  std::vector<std::string> mismatches;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) mismatches.push_back(what);
  };
  expect(recorded == 5, fmt::format("recorded batches {}", recorded));
  expect(r.run_id == "e2e", "run_id");
  expect(r.batch_count == 5 && r.batch_size == 4, "batch shape");
  expect(r.t_inf == 1.5, fmt::format("t_inf {}", r.t_inf));
  expect(r.t_mean_inf == 0.3, fmt::format("t_mean_inf {}", r.t_mean_inf));
  expect(r.t_test && *r.t_test == to_seconds(test_end - test_start), "t_test");
  expect(r.w_mean_inf == 3.0, fmt::format("w_mean_inf {}", r.w_mean_inf));
  expect(r.wm_inf == 3.0 * 1.5 / 60.0, fmt::format("wm_inf {}", r.wm_inf));
  expect(r.empty_batch_count == 0, "empty batches");
  expect(r.per_batch.size() == 5, "per-batch rows");
  for (const auto& b : r.per_batch) {
    expect(b.duration_s == 0.3 && b.w_mean == 3.0 && b.sample_count >= 10 && b.sample_count <= 17,
           fmt::format("batch {} ({} samples)", b.index, b.sample_count));
  }
  expect(r.idle_power && *r.idle_power == 1.0, "idle power");
  expect(r.top1 && *r.top1 == 4.0 / 8.0, "top1");
  expect(r.top5 && *r.top5 == 7.0 / 8.0, "top5");
  const double sync_bound = manifest.clock_rtt / 2 + 1e-6;
  expect(std::abs(r.clock_offset - 2.5) <= sync_bound, fmt::format("clock_offset {}", r.clock_offset));
  expect(r.clock_dispersion <= 0.005, "clock_dispersion");
  expect(stats.gaps == 0, "sampler gaps");
  fs::remove_all(dir);
  return {mismatches.empty(),
          mismatches.empty()
              ? fmt::format("all report fields match; {} samples, offset {:.6f} s", stats.samples, r.clock_offset)
              : fmt::format("mismatched: {}", fmt::join(mismatches, "; "))};
}

}  // namespace

int main() {
  report("eq2_oracle_equivalence", eq2_oracle);
  report("square_wave_wattminutes", square_wave);
  report("crossover_rpi_vs_coral", crossover_rpi_coral);
  report("crossover_jetson_vs_coral", crossover_jetson_coral);
  report("busy_fraction_at_jetson_crossover", busy_fraction_jetson);
  report("max_rate_and_arduino_energy", max_rate_arduino);
  report("accuracy_fixture", accuracy_fixture);
  report("crc_and_framing", crc_framing);
  report("timesync_bound", timesync_bound);
  report("end_to_end_loopback", end_to_end);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
