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

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "edgemeter/clock.hpp"
#include "edgemeter/measurement.hpp"
#include "edgemeter/net.hpp"
#include "edgemeter/protocol.hpp"
#include "edgemeter/timesync.hpp"

namespace edgemeter {

/// Receives what agents report. Calls for one run arrive in order from a
/// single session; implementations must keep each call short because the
/// monitor's sampler runs alongside.
class RunSink {
 public:
  virtual ~RunSink() = default;
  virtual void begin_run(const protocol::Hello& hello) = 0;
  virtual void append_event(const std::string& run_id, const EventMark& event) = 0;
  virtual void append_result(const std::string& run_id, const InferenceResult& result) = 0;
  /// Returns the persisted manifest.
  virtual RunManifest end_run(const std::string& run_id) = 0;
};

/// Writes `<runs_dir>/<run_id>/{events.csv,results.csv,manifest.json}`.
/// Lines are appended whole and flushed, so a crash leaves parseable files.
class DirectoryRunSink final : public RunSink {
 public:
  DirectoryRunSink(std::filesystem::path runs_dir, std::filesystem::path power_file);

  void begin_run(const protocol::Hello& hello) override;
  void append_event(const std::string& run_id, const EventMark& event) override;
  void append_result(const std::string& run_id, const InferenceResult& result) override;
  RunManifest end_run(const std::string& run_id) override;

  std::filesystem::path run_dir(const std::string& run_id) const { return runs_dir_ / run_id; }

 private:
  struct OpenRun {
    RunManifest manifest;
    std::unique_ptr<std::FILE, int (*)(std::FILE*)> events{nullptr, &std::fclose};
    std::unique_ptr<std::FILE, int (*)(std::FILE*)> results{nullptr, &std::fclose};
    std::set<std::uint64_t> starts;
    std::set<std::uint64_t> ends;
  };

  void write_manifest(const OpenRun& run) const;

  std::filesystem::path runs_dir_;
  std::filesystem::path power_file_;
  std::mutex mutex_;
  std::map<std::string, OpenRun> runs_;
};

/// True for names usable as a run directory: [A-Za-z0-9._-]+, not . or ..
bool valid_run_id(std::string_view run_id);

/// Monitor side of the agent protocol: time authority, dataset host and
/// event collector. Serves one agent session at a time on its own thread.
class AgentServer {
 public:
  /// Binds immediately; throws TransportError(AddressInUse).
  AgentServer(const net::Endpoint& listen, std::filesystem::path dataset_root, RunSink& sink,
              Clock& clock);
  ~AgentServer();
  AgentServer(const AgentServer&) = delete;
  AgentServer& operator=(const AgentServer&) = delete;

  std::uint16_t port() const { return port_; }
  void stop();
  std::uint64_t sessions_served() const { return sessions_.load(); }

 private:
  void accept_loop();
  void serve_session(net::LineChannel& channel);
  bool handle(net::LineChannel& channel, const protocol::Message& message,
              std::optional<std::string>& run_id);
  void send_file(net::LineChannel& channel, const std::string& path);

  net::Socket listener_;
  std::uint16_t port_ = 0;
  std::filesystem::path dataset_root_;
  RunSink& sink_;
  Clock& clock_;
  std::atomic<bool> stopping_{false};
  std::atomic<std::uint64_t> sessions_{0};
  std::thread thread_;
};

/// Resolves `relative` under `root`, rejecting absolute paths and anything
/// that escapes the root. Throws TransportError(FetchOutsideRoot).
std::filesystem::path resolve_under_root(const std::filesystem::path& root, const std::string& relative);

/// DUT side of the agent protocol. Synchronizes clocks before the first
/// event and sends every event already corrected to the monitor clock.
class AgentSession {
 public:
  /// Throws TransportError(ConnectFailed).
  AgentSession(const std::string& address, Clock& dut_clock, SyncOptions sync = {});

  ProbeSample probe();
  const SyncEstimate& sync();
  const std::optional<SyncEstimate>& estimate() const { return estimate_; }

  /// Announces the run (syncing first if needed) and waits for the echo.
  void hello(protocol::Hello hello);
  /// `dut_time` is read on the DUT clock; it is corrected before sending.
  void event(const std::string& label, Timestamp dut_time);
  void event_now(const std::string& label) { event(label, dut_clock_.now()); }
  void result(const InferenceResult& result);
  std::vector<std::uint8_t> fetch(const std::string& path);
  /// Closes the run on the monitor; returns the number of complete batches
  /// it recorded.
  std::uint64_t end_run();

  Clock& clock() { return dut_clock_; }

 private:
  protocol::Message receive();

  net::LineChannel channel_;
  Clock& dut_clock_;
  SyncOptions sync_options_;
  std::optional<SyncEstimate> estimate_;
  std::string run_id_;
};

/// A fully scripted run for the built-in stub client: events carry DUT-clock
/// timestamps and are replayed without any real inference.
struct ScriptedRun {
  protocol::Hello hello;
  std::vector<EventMark> events;
  std::vector<InferenceResult> results;
};

/// Connects, syncs, replays the script and ends the run. Returns the
/// monitor's batch count.
std::uint64_t replay_run(const std::string& address, Clock& dut_clock, const ScriptedRun& script,
                         SyncOptions sync = {});

}  // namespace edgemeter
