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

#include "edgemeter/cli.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "edgemeter/agent.hpp"
#include "edgemeter/aggregate.hpp"
#include "edgemeter/error.hpp"
#include "edgemeter/keyvalue.hpp"
#include "edgemeter/monitor.hpp"
#include "edgemeter/predict.hpp"
#include "edgemeter/psu.hpp"
#include "edgemeter/report.hpp"

namespace edgemeter::cli {

namespace fs = std::filesystem;

std::atomic<bool>& interrupt_flag() {
  static std::atomic<bool> flag{false};
  return flag;
}

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError(ErrorCode::FileNotFound, fmt::format("cannot write {}", path.string()));
  out << content;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// PSU connection settings shared by `monitor` and `psu`: config file
/// first, command-line flags on top.
struct PsuOptions {
  std::string port;
  std::string profile = "hm310p-community";
  std::string register_file;
  unsigned baud = 9600;
  char parity = 'N';
  unsigned stop_bits = 1;
  unsigned unit_id = 1;
  unsigned timeout_ms = 200;
  unsigned retries = 2;

  void add_to(CLI::App& app) {
    app.add_option("--profile", profile, "Named register profile")->capture_default_str();
    app.add_option("--register-file", register_file, "Register-map key/value file (overrides --profile)");
    app.add_option("--baud", baud, "Serial baud rate")->capture_default_str();
    app.add_option("--unit-id", unit_id, "Modbus unit id")->capture_default_str();
    app.add_option("--timeout-ms", timeout_ms, "Response timeout")->capture_default_str();
    app.add_option("--retries", retries, "Retries after timeout or CRC error")->capture_default_str();
  }

  void apply_config(const KeyValues& kv) {
    profile = kv.get_string("profile", profile);
    baud = static_cast<unsigned>(kv.get_uint("baud", baud));
    unit_id = static_cast<unsigned>(kv.get_uint("unit_id", unit_id));
    timeout_ms = static_cast<unsigned>(kv.get_uint("timeout_ms", timeout_ms));
    retries = static_cast<unsigned>(kv.get_uint("retries", retries));
    stop_bits = static_cast<unsigned>(kv.get_uint("stop_bits", stop_bits));
    const auto p = kv.get_string("parity", std::string(1, parity));
    parity = p.empty() ? 'N' : p.front();
  }

  RegisterMap register_map(const KeyValues& config) const {
    if (!register_file.empty()) return RegisterMap::from_key_values(KeyValues::load(register_file));
    auto named = RegisterMap::named(profile);
    if (!named) throw ParseError(ErrorCode::InvalidConfig, fmt::format("unknown register profile '{}'", profile));
    // Register keys in the global config refine the named profile.
    return RegisterMap::from_key_values(config, *named);
  }

  DriverOptions driver() const {
    return {static_cast<std::uint8_t>(unit_id), Micros{timeout_ms * 1000LL}, retries};
  }

  SerialSettings serial() const { return {baud, 8, parity, stop_bits}; }
};

/// Explicit flags win over the config file, which wins over defaults.
PsuOptions resolve_psu(const CLI::App& cmd, const PsuOptions& flags, const KeyValues& config) {
  PsuOptions merged = flags;
  merged.apply_config(config);
  if (cmd.count("--profile") != 0) merged.profile = flags.profile;
  if (cmd.count("--baud") != 0) merged.baud = flags.baud;
  if (cmd.count("--unit-id") != 0) merged.unit_id = flags.unit_id;
  if (cmd.count("--timeout-ms") != 0) merged.timeout_ms = flags.timeout_ms;
  if (cmd.count("--retries") != 0) merged.retries = flags.retries;
  return merged;
}

// --- analyze ---------------------------------------------------------------

struct AnalyzeArgs {
  std::string run_dir;
  std::string manifest;
  std::string power;
  std::string events;
  std::string results;
  std::string ground_truth;
  std::string idle_window;
  std::string out;
  std::int64_t label_offset = 0;
  std::uint64_t batch_size = 1;
};

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
  RunManifest manifest;
  if (!a.run_dir.empty() || !a.manifest.empty()) {
    const fs::path path = !a.manifest.empty() ? fs::path(a.manifest) : fs::path(a.run_dir) / "manifest.json";
    manifest = parse_manifest(read_file(path), path.parent_path());
    if (!a.power.empty()) manifest.power_file = a.power;
    if (!a.events.empty()) manifest.events_file = a.events;
  } else {
    if (a.power.empty() || a.events.empty()) throw UsageError("analyze needs --run, --manifest or --power and --events");
    manifest.power_file = a.power;
    manifest.events_file = a.events;
    manifest.run_id = fs::path(a.events).stem().string();
    manifest.batch_size = a.batch_size;
  }
  if (!a.results.empty()) manifest.results_file = a.results;

  ReportInputs inputs;
  inputs.label_offset = a.label_offset;
  if (!a.ground_truth.empty()) inputs.ground_truth = parse_ground_truth(read_file(a.ground_truth));
  if (!a.idle_window.empty()) {
    inputs.idle_window = parse_time_range(a.idle_window);
    if (!inputs.idle_window) throw UsageError(fmt::format("bad idle window '{}', expected t0:t1", a.idle_window));
  }

  const auto samples = parse_power_file(read_file(manifest.power_file));
  const auto events = parse_events_file(read_file(manifest.events_file));
  if (a.run_dir.empty() && a.manifest.empty()) manifest.batch_count = events.intervals.size();
  if (manifest.results_file) inputs.results = parse_results_file(read_file(*manifest.results_file));

  const auto report = build_report(manifest, samples, events, inputs);
  if (!a.out.empty()) write_text(a.out, serialize_report(report));
  out << summary_table(report);
  return kExitOk;
}

// --- accuracy --------------------------------------------------------------

int cmd_accuracy(const std::string& results_path, const std::string& truth_path, const std::vector<unsigned>& ks,
                 std::int64_t label_offset, std::ostream& out) {
  const auto results = parse_results_file(read_file(results_path));
  const auto truth = parse_ground_truth(read_file(truth_path));
  const auto acc = score_topk(results, truth, std::set<unsigned>(ks.begin(), ks.end()), label_offset);
  out << fmt::format("samples: {}\n", results.size());
  for (const auto& [k, value] : acc) out << fmt::format("top{}: {:.6f}\n", k, value);
  return kExitOk;
}

// --- predict ---------------------------------------------------------------

struct RateRange {
  double start = 0.0;
  std::optional<double> stop;  // nullopt = max
  double step = 1.0;
};

RateRange parse_rates(const std::string& text) {
  const auto a = text.find(':');
  const auto b = a == std::string::npos ? std::string::npos : text.find(':', a + 1);
  if (b == std::string::npos) throw UsageError(fmt::format("bad --rates '{}', expected start:stop:step", text));
  RateRange r;
  auto start = parse_double(std::string_view(text).substr(0, a));
  auto step = parse_double(std::string_view(text).substr(b + 1));
  const auto stop_text = text.substr(a + 1, b - a - 1);
  if (!start || !step) throw UsageError(fmt::format("bad --rates '{}'", text));
  r.start = *start;
  r.step = *step;
  if (stop_text != "max") {
    auto stop = parse_double(stop_text);
    if (!stop) throw UsageError(fmt::format("bad --rates stop '{}'", stop_text));
    r.stop = *stop;
  }
  return r;
}

std::vector<DevicePowerProfile> load_profiles(const std::vector<std::string>& paths, std::ostream& err) {
  std::vector<DevicePowerProfile> profiles;
  for (const auto& p : paths) {
    profiles.push_back(load_profile(fs::path(p)));
    if (auto warning = profile_warning(profiles.back())) err << "warning: " << *warning << "\n";
  }
  return profiles;
}

int cmd_predict(const std::vector<std::string>& profile_paths, const std::string& rates, const std::string& out_path,
                std::ostream& out, std::ostream& err) {
  const auto profiles = load_profiles(profile_paths, err);
  if (profiles.empty()) throw UsageError("predict needs at least one --profile");
  const auto range = parse_rates(rates);
  double stop = 0.0;
  for (const auto& p : profiles) stop = std::max(stop, static_cast<double>(max_rate(p)));
  if (range.stop) stop = *range.stop;

  std::string csv = "rate_per_min";
  for (const auto& p : profiles) csv += fmt::format(",{0}_wm_per_min,{0}_busy_fraction", p.name);
  csv += '\n';
  for (const auto& row : sample_curves(profiles, range.start, stop, range.step)) {
    csv += format_double(row.rate);
    for (const auto& point : row.points) {
      csv += point ? fmt::format(",{:.6f},{:.6f}", point->energy_per_minute, point->busy_fraction) : ",,";
    }
    csv += '\n';
  }
  if (out_path.empty()) {
    out << csv;
  } else {
    write_text(out_path, csv);
    for (const auto& p : profiles) {
      out << fmt::format("{}: max_rate {} /min, idle {:.3f} W, at max {:.6f} wattmin/min\n", p.name, max_rate(p),
                         p.w_idle, energy_at_rate(p, static_cast<double>(max_rate(p))).energy_per_minute);
    }
  }
  return kExitOk;
}

int cmd_crossover(const std::vector<std::string>& profile_paths, std::ostream& out, std::ostream& err) {
  const auto profiles = load_profiles(profile_paths, err);
  if (profiles.size() != 2) throw UsageError("crossover needs exactly two --profile files");
  const auto& a = profiles[0];
  const auto& b = profiles[1];
  const auto r = crossover(a, b);
  if (!r) {
    out << fmt::format("crossover {} / {}: none\n", a.name, b.name);
    return kExitOk;
  }
  const auto pa = energy_at_rate(a, *r);
  const auto pb = energy_at_rate(b, *r);
  out << fmt::format("crossover {} / {}: {:.3f} inferences/min at {:.6f} wattmin/min\n", a.name, b.name, *r,
                     pa.energy_per_minute);
  out << fmt::format("busy_fraction {}: {:.4f}\n", a.name, pa.busy_fraction);
  out << fmt::format("busy_fraction {}: {:.4f}\n", b.name, pb.busy_fraction);
  const auto below = rate_line(a).slope < rate_line(b).slope ? b.name : a.name;
  out << fmt::format("cheaper below crossover: {}\n", below);
  return kExitOk;
}

// --- plot ------------------------------------------------------------------

int cmd_plot(const std::string& power, const std::string& events_path, const std::string& out_path,
             const std::string& format, bool annotate, bool timestamp, std::ostream& out) {
  const auto samples = parse_power_file(read_file(power));
  std::vector<BatchInterval> intervals;
  if (!events_path.empty()) intervals = parse_events_file(read_file(events_path)).intervals;
  if (samples.empty()) throw AnalysisError(ErrorCode::EmptyTrace, fmt::format("{} has no samples", power));
  if (format == "svg") {
    write_text(out_path, render_svg(samples, intervals, annotate, timestamp ? std::optional(utc_now()) : std::nullopt));
    out << fmt::format("wrote {} ({} samples, {} bands)\n", out_path, samples.size(), annotate ? intervals.size() : 0);
  } else {
    write_text(out_path, render_power_series(samples));
    if (annotate && !intervals.empty()) write_text(out_path + ".bands.csv", render_band_series(intervals));
    out << fmt::format("wrote {}\n", out_path);
  }
  return kExitOk;
}

// --- psu -------------------------------------------------------------------

std::uint16_t parse_u16(const std::string& text) {
  KeyValues kv;
  kv.set("value", text);
  const auto v = kv.get_uint("value", 0);
  if (v > 0xFFFF) throw UsageError(fmt::format("'{}' does not fit in 16 bits", text));
  return static_cast<std::uint16_t>(v);
}

// --- monitor ---------------------------------------------------------------

struct MonitorArgs {
  double interval = 0.1;
  std::string out = "power.csv";
  std::string listen;
  std::string dataset_root = ".";
  std::string runs_dir = "runs";
  bool live = false;
  double duration = 0.0;
};

int cmd_monitor(const MonitorArgs& m, const PsuOptions& psu, const KeyValues& config, std::ostream& out,
                std::ostream& err) {
  SystemClock clock;
  const auto map = psu.register_map(config);
  if (auto warning = interval_warning(Micros{std::llround(m.interval * 1e6)}, psu.baud, map.measurement_count());
      warning && !psu.port.starts_with("sim:")) {
    err << "warning: " << *warning << "\n";
  }
  auto port = open_port(psu.port, clock, map, static_cast<std::uint8_t>(psu.unit_id), psu.serial());
  PsuClient client(*port, map, psu.driver(), clock);
  Sampler sampler(client, clock, m.out, Micros{std::llround(m.interval * 1e6)}, 10, m.live ? &out : nullptr);

  std::unique_ptr<DirectoryRunSink> sink;
  std::unique_ptr<AgentServer> server;
  if (!m.listen.empty()) {
    auto endpoint = net::parse_endpoint(m.listen);
    if (!endpoint) throw UsageError(fmt::format("bad --listen '{}', expected host:port", m.listen));
    sink = std::make_unique<DirectoryRunSink>(m.runs_dir, m.out);
    server = std::make_unique<AgentServer>(*endpoint, m.dataset_root, *sink, clock);
    out << fmt::format("listening on {}:{}\n", endpoint->host, server->port()) << std::flush;
  }

  sampler.start();
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(m.duration);
  while (!interrupt_flag().load()) {
    if (m.duration > 0 && std::chrono::steady_clock::now() >= deadline) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  if (server) server->stop();
  const auto stats = sampler.stop();
  if (m.live) out << "\n";
  out << fmt::format("samples: {}\ngaps: {}\n", stats.samples, stats.gaps);
  return kExitOk;
}

// --- stub-agent --------------------------------------------------------------

struct StubArgs {
  std::string connect;
  std::string run_id = "run";
  std::string device = "stub";
  std::string model = "sleep";
  std::uint64_t batches = 10;
  std::uint64_t batch_size = 1;
  double sleep = 0.05;
  double clock_offset = 0.0;
  std::string fetch;
};

int cmd_stub_agent(const StubArgs& s, std::ostream& out) {
  SystemClock system;
  OffsetClock dut_clock(system, Micros{std::llround(s.clock_offset * 1e6)});
  AgentSession session(s.connect, dut_clock);
  protocol::Hello hello{s.run_id, s.device, s.model, s.batches, s.batch_size, std::nullopt};
  session.hello(hello);
  session.event_now("test_start");
  for (std::uint64_t i = 0; i < s.batches && !interrupt_flag().load(); ++i) {
    if (!s.fetch.empty()) session.fetch(s.fetch);
    session.event_now(fmt::format("inf_start_batch_{}", i));
    std::this_thread::sleep_for(std::chrono::duration<double>(s.sleep));
    session.event_now(fmt::format("inf_end_batch_{}", i));
  }
  session.event_now("test_end");
  const auto recorded = session.end_run();
  const auto& est = *session.estimate();
  out << fmt::format("offset: {:.6f} s\nrtt: {:.6f} s\nbatches recorded: {}\n", est.offset, est.rtt, recorded);
  return kExitOk;
}

int classify(const std::exception& e, std::ostream& err) {
  err << "error: " << e.what() << "\n";
  if (dynamic_cast<const ParseError*>(&e) != nullptr || dynamic_cast<const UsageError*>(&e) != nullptr) {
    return kExitInputError;
  }
  return kExitAnalysisError;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"edgemeter: inference latency, power and energy measurement for edge devices", "edgemeter"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "Key/value file with register map and PSU defaults");

  PsuOptions psu;
  MonitorArgs mon;
  auto* monitor = app.add_subcommand("monitor", "Sample the supply and host the agent server");
  monitor->add_option("--psu", psu.port, "Serial device or sim:const:<W> / sim:square:<low>,<high>,<period>")
      ->required();
  monitor->add_option("--interval", mon.interval, "Sampling interval in seconds")->capture_default_str();
  monitor->add_option("--out", mon.out, "Power file to write")->capture_default_str();
  monitor->add_option("--listen", mon.listen, "host:port for the agent protocol");
  monitor->add_option("--dataset-root", mon.dataset_root, "Directory agents may FETCH from")->capture_default_str();
  monitor->add_option("--runs-dir", mon.runs_dir, "Where run directories are created")->capture_default_str();
  monitor->add_flag("--live", mon.live, "Print a rolling last-sample line");
  monitor->add_option("--duration", mon.duration, "Stop after this many seconds (0 = until interrupted)");
  psu.add_to(*monitor);

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Compute timing, energy and accuracy for a run");
  analyze->add_option("--run", an.run_dir, "Run directory holding manifest.json");
  analyze->add_option("--manifest", an.manifest, "Manifest file");
  analyze->add_option("--power", an.power, "Power file");
  analyze->add_option("--events", an.events, "Events file");
  analyze->add_option("--results", an.results, "Results file");
  analyze->add_option("--ground-truth", an.ground_truth, "Lines of 'sample_id label_index'");
  analyze->add_option("--label-offset", an.label_offset, "Subtracted from result class indices")->capture_default_str();
  analyze->add_option("--batch-size", an.batch_size, "Batch size when no manifest is given")->capture_default_str();
  analyze->add_option("--idle-window", an.idle_window, "t0:t1 range to average as idle power");
  analyze->add_option("--out", an.out, "Report JSON to write");

  std::string acc_results;
  std::string acc_truth;
  std::vector<unsigned> acc_ks = {1, 5};
  std::int64_t acc_offset = 0;
  auto* accuracy = app.add_subcommand("accuracy", "Top-k accuracy of a results file");
  accuracy->add_option("--results", acc_results, "Results file")->required();
  accuracy->add_option("--ground-truth", acc_truth, "Ground-truth file")->required();
  accuracy->add_option("--k", acc_ks, "Ranks to score")->delimiter(',')->capture_default_str();
  accuracy->add_option("--label-offset", acc_offset, "Subtracted from result class indices")->capture_default_str();

  std::vector<std::string> profiles;
  std::string rates = "0:max:1";
  std::string curve_out;
  auto* predict = app.add_subcommand("predict", "Energy per minute as a function of inference rate");
  predict->add_option("--profile", profiles, "Device profile file (repeatable)");
  predict->add_option("--rates", rates, "start:stop:step, stop may be 'max'")->capture_default_str();
  predict->add_option("--out", curve_out, "Curve CSV to write (stdout otherwise)");
  std::vector<std::string> cross_profiles;
  auto* cross = predict->add_subcommand("crossover", "Rate where two devices cost the same");
  cross->add_option("--profile", cross_profiles, "Exactly two profile files")->required();

  std::string plot_power;
  std::string plot_events;
  std::string plot_out;
  std::string plot_format = "svg";
  bool no_annotate = false;
  bool no_timestamp = false;
  auto* plot = app.add_subcommand("plot", "Power trace with inference bands");
  plot->add_option("--power", plot_power, "Power file")->required();
  plot->add_option("--events", plot_events, "Events file");
  plot->add_option("--out", plot_out, "Output file")->required();
  plot->add_option("--format", plot_format, "svg or csv-series")
      ->check(CLI::IsMember({"svg", "csv-series"}))
      ->capture_default_str();
  plot->add_flag("--no-annotate", no_annotate, "Omit interval bands");
  plot->add_flag("--no-timestamp", no_timestamp, "Omit the generation timestamp from SVG");

  PsuOptions psu_manual;
  auto* psu_cmd = app.add_subcommand("psu", "Manual register access for bring-up");
  psu_cmd->add_option("--port", psu_manual.port, "Serial device or sim:...")->required();
  psu_manual.add_to(*psu_cmd);
  psu_cmd->require_subcommand(1);
  auto* psu_read = psu_cmd->add_subcommand("read", "Read voltage, current and power");
  std::string output_state;
  auto* psu_output = psu_cmd->add_subcommand("output", "Switch the output on or off");
  psu_output->add_option("state", output_state)->required()->check(CLI::IsMember({"on", "off"}));
  std::string reg_addr;
  std::uint16_t reg_count = 1;
  auto* psu_read_reg = psu_cmd->add_subcommand("read-reg", "Read holding registers");
  psu_read_reg->add_option("address", reg_addr)->required();
  psu_read_reg->add_option("count", reg_count);
  std::string reg_value;
  auto* psu_write_reg = psu_cmd->add_subcommand("write-reg", "Write one register");
  psu_write_reg->add_option("address", reg_addr)->required();
  psu_write_reg->add_option("value", reg_value)->required();

  StubArgs stub;
  auto* stub_cmd = app.add_subcommand("stub-agent", "Minimal agent: sleeps instead of inferring");
  stub_cmd->add_option("--connect", stub.connect, "Monitor host:port")->required();
  stub_cmd->add_option("--run-id", stub.run_id)->capture_default_str();
  stub_cmd->add_option("--device", stub.device)->capture_default_str();
  stub_cmd->add_option("--model", stub.model)->capture_default_str();
  stub_cmd->add_option("--batches", stub.batches)->capture_default_str();
  stub_cmd->add_option("--batch-size", stub.batch_size)->capture_default_str();
  stub_cmd->add_option("--sleep", stub.sleep, "Seconds per simulated inference")->capture_default_str();
  stub_cmd->add_option("--clock-offset", stub.clock_offset, "Pretend the agent clock runs ahead by this much");
  stub_cmd->add_option("--fetch", stub.fetch, "Dataset file to FETCH before every batch");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    KeyValues config;
    if (!config_path.empty()) config = KeyValues::load(config_path);
    if (*monitor) {
      const auto merged = resolve_psu(*monitor, psu, config);
      if (monitor->count("--interval") == 0) mon.interval = config.get_double("interval", mon.interval);
      return cmd_monitor(mon, merged, config, out, err);
    }
    if (*analyze) return cmd_analyze(an, out);
    if (*accuracy) return cmd_accuracy(acc_results, acc_truth, acc_ks, acc_offset, out);
    if (*cross) return cmd_crossover(cross_profiles, out, err);
    if (*predict) return cmd_predict(profiles, rates, curve_out, out, err);
    if (*plot) return cmd_plot(plot_power, plot_events, plot_out, plot_format, !no_annotate, !no_timestamp, out);
    if (*psu_cmd) {
      const auto merged = resolve_psu(*psu_cmd, psu_manual, config);
      SystemClock clock;
      const auto map = merged.register_map(config);
      auto port = open_port(merged.port, clock, map, static_cast<std::uint8_t>(merged.unit_id), merged.serial());
      PsuClient client(*port, map, merged.driver(), clock);
      if (*psu_read) {
        const auto s = client.read_measurements();
        out << fmt::format("voltage: {:.3f} V\ncurrent: {:.3f} A\npower: {:.3f} W\n", s.voltage, s.current, s.power);
      } else if (*psu_output) {
        client.set_output(output_state == "on");
        out << fmt::format("output: {}\n", output_state);
      } else if (*psu_read_reg) {
        const auto address = parse_u16(reg_addr);
        const auto regs = client.read_registers(address, reg_count);
        for (std::size_t i = 0; i < regs.size(); ++i) {
          out << fmt::format("0x{:04x}: {} (0x{:04x})\n", address + i, regs[i], regs[i]);
        }
      } else if (*psu_write_reg) {
        client.write_register(parse_u16(reg_addr), parse_u16(reg_value));
        out << "ok\n";
      }
      return kExitOk;
    }
    if (*stub_cmd) return cmd_stub_agent(stub, out);
  } catch (const std::exception& e) {
    return classify(e, err);
  }
  return kExitInputError;
}

}  // namespace edgemeter::cli
