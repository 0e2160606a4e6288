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

#include "edgemeter/agent.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include <fmt/format.h>

#include "edgemeter/error.hpp"

namespace edgemeter {

namespace fs = std::filesystem;
using namespace protocol;

namespace {

constexpr Micros kPollSlice{100'000};
constexpr Micros kReplyTimeout{5'000'000};

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void violation(const std::string& why) {
  throw TransportError(ErrorCode::ProtocolViolation, why);
}

void write_atomically(const fs::path& path, const std::string& content) {
  const auto tmp = fs::path(path).concat(".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
  }
  fs::rename(tmp, path);
}

}  // namespace

bool valid_run_id(std::string_view run_id) {
  if (run_id.empty() || run_id == "." || run_id == "..") return false;
  return std::all_of(run_id.begin(), run_id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
           c == '_' || c == '-';
  });
}

// --- DirectoryRunSink ----------------------------------------------------------

DirectoryRunSink::DirectoryRunSink(fs::path runs_dir, fs::path power_file)
    : runs_dir_(std::move(runs_dir)), power_file_(fs::absolute(power_file)) {
  fs::create_directories(runs_dir_);
}

void DirectoryRunSink::write_manifest(const OpenRun& run) const {
  write_atomically(run_dir(run.manifest.run_id) / "manifest.json", serialize_manifest(run.manifest));
}

void DirectoryRunSink::begin_run(const Hello& hello) {
  std::lock_guard lock(mutex_);
  if (runs_.count(hello.run_id) != 0) violation(fmt::format("run '{}' already open", hello.run_id));
  const auto dir = run_dir(hello.run_id);
  fs::create_directories(dir);

  OpenRun run;
  auto& m = run.manifest;
  m.run_id = hello.run_id;
  m.batch_count = 0;
  m.planned_batch_count = hello.batch_count;
  m.batch_size = hello.batch_size;
  m.device_name = hello.device;
  m.model_name = hello.model;
  if (hello.sync) {
    m.clock_offset = hello.sync->clock_offset;
    m.clock_rtt = hello.sync->clock_rtt;
    m.clock_dispersion = hello.sync->clock_dispersion;
    m.probe_count = hello.sync->probe_count;
  }
  m.power_file = power_file_;
  m.events_file = "events.csv";
  run.events.reset(std::fopen((dir / "events.csv").c_str(), "wb"));
  if (!run.events) throw std::runtime_error("cannot create " + (dir / "events.csv").string());
  write_manifest(run);
  runs_.emplace(hello.run_id, std::move(run));
}

void DirectoryRunSink::append_event(const std::string& run_id, const EventMark& event) {
  const auto line = format_event_line(event);
  std::lock_guard lock(mutex_);
  auto& run = runs_.at(run_id);
  std::fwrite(line.data(), 1, line.size(), run.events.get());
  std::fflush(run.events.get());
  if (auto label = parse_label(event.label)) {
    if (label->kind == LabelKind::BatchStart) run.starts.insert(label->batch);
    if (label->kind == LabelKind::BatchEnd) run.ends.insert(label->batch);
  }
}

void DirectoryRunSink::append_result(const std::string& run_id, const InferenceResult& result) {
  const auto line = format_result_line(result);
  std::lock_guard lock(mutex_);
  auto& run = runs_.at(run_id);
  if (!run.results) {
    const auto path = run_dir(run_id) / "results.csv";
    run.results.reset(std::fopen(path.c_str(), "wb"));
    if (!run.results) throw std::runtime_error("cannot create " + path.string());
    run.manifest.results_file = "results.csv";
    write_manifest(run);
  }
  std::fwrite(line.data(), 1, line.size(), run.results.get());
  std::fflush(run.results.get());
}

RunManifest DirectoryRunSink::end_run(const std::string& run_id) {
  std::lock_guard lock(mutex_);
  auto node = runs_.extract(run_id);
  if (node.empty()) violation(fmt::format("run '{}' is not open", run_id));
  auto& run = node.mapped();
  std::vector<std::uint64_t> complete;
  std::set_intersection(run.starts.begin(), run.starts.end(), run.ends.begin(), run.ends.end(),
                        std::back_inserter(complete));
  run.manifest.batch_count = complete.size();
  write_manifest(run);

  RunManifest resolved = run.manifest;
  resolved.events_file = run_dir(run_id) / resolved.events_file;
  if (resolved.results_file) resolved.results_file = run_dir(run_id) / *resolved.results_file;
  return resolved;
}

// --- AgentServer -----------------------------------------------------------------

fs::path resolve_under_root(const fs::path& root, const std::string& relative) {
  const fs::path rel(relative);
  if (relative.empty() || rel.is_absolute() || rel.has_root_name()) {
    throw TransportError(ErrorCode::FetchOutsideRoot, fmt::format("'{}' is not a relative path", relative));
  }
  const auto base = fs::weakly_canonical(root);
  const auto candidate = fs::weakly_canonical(base / rel);
  auto [b, c] = std::mismatch(base.begin(), base.end(), candidate.begin(), candidate.end());
  if (b != base.end() || candidate == base) {
    throw TransportError(ErrorCode::FetchOutsideRoot, fmt::format("'{}' escapes the dataset root", relative));
  }
  return candidate;
}

AgentServer::AgentServer(const net::Endpoint& listen, fs::path dataset_root, RunSink& sink, Clock& clock)
    : listener_(net::listen_tcp(listen)),
      port_(net::local_port(listener_)),
      dataset_root_(std::move(dataset_root)),
      sink_(sink),
      clock_(clock) {
  thread_ = std::thread([this] { accept_loop(); });
}

AgentServer::~AgentServer() { stop(); }

void AgentServer::stop() {
  stopping_ = true;
  if (thread_.joinable()) thread_.join();
  listener_.close();
}

void AgentServer::accept_loop() {
  while (!stopping_) {
    auto socket = net::accept_tcp(listener_, kPollSlice);
    if (!socket.valid()) continue;
    net::LineChannel channel(std::move(socket));
    serve_session(channel);
    ++sessions_;
  }
}

void AgentServer::serve_session(net::LineChannel& channel) {
  std::optional<std::string> run_id;
  try {
    while (!stopping_) {
      auto line = channel.read_line(kPollSlice);
      if (!line) continue;
      const Timestamp received = clock_.now();
      Message message;
      try {
        message = decode(*line);
        if (auto* probe = std::get_if<TimeProbe>(&message)) {
          channel.send_line(encode(TimeReply{probe->t1, to_seconds(received), to_seconds(clock_.now())}));
          continue;
        }
        if (!handle(channel, message, run_id)) break;
      } catch (const TransportError& e) {
        if (e.code() != ErrorCode::ProtocolViolation) throw;
        channel.send_line(encode(ErrorMsg{"ProtocolViolation", e.what()}));
        break;
      }
    }
  } catch (const TransportError&) {
    // Peer went away; whatever was recorded so far stays on disk.
  }
  if (run_id) sink_.end_run(*run_id);
}

bool AgentServer::handle(net::LineChannel& channel, const Message& message,
                         std::optional<std::string>& run_id) {
  auto require_run = [&](const std::string& id) {
    if (!run_id) violation("no HELLO before run traffic");
    if (id != *run_id) violation(fmt::format("run '{}' is not the open run '{}'", id, *run_id));
  };
  return std::visit(
      overloaded{
          [&](const Hello& h) {
            if (run_id) violation("second HELLO in one session");
            if (!valid_run_id(h.run_id)) violation(fmt::format("invalid run id '{}'", h.run_id));
            if (h.batch_size == 0) violation("batch_size must be positive");
            sink_.begin_run(h);
            run_id = h.run_id;
            channel.send_line(encode(h));
            return true;
          },
          [&](const Event& e) {
            require_run(e.run_id);
            if (!parse_label(e.label)) violation(fmt::format("unknown label '{}'", e.label));
            sink_.append_event(e.run_id, EventMark{e.label, e.time});
            return true;
          },
          [&](const Result& r) {
            require_run(r.run_id);
            if (r.result.sample_id.empty() || r.result.sample_id.find(',') != std::string::npos) {
              violation("sample_id must be non-empty and comma-free");
            }
            sink_.append_result(r.run_id, r.result);
            return true;
          },
          [&](const Fetch& f) {
            send_file(channel, f.path);
            return true;
          },
          [&](const EndRun& e) {
            require_run(e.run_id);
            const auto manifest = sink_.end_run(e.run_id);
            run_id.reset();
            channel.send_line(encode(EndRun{e.run_id, manifest.batch_count}));
            return true;
          },
          [&](const auto&) -> bool { violation(fmt::format("unexpected {} from agent", kind_name(message))); },
      },
      message);
}

void AgentServer::send_file(net::LineChannel& channel, const std::string& path) {
  fs::path resolved;
  try {
    resolved = resolve_under_root(dataset_root_, path);
  } catch (const TransportError& e) {
    channel.send_line(encode(ErrorMsg{std::string(to_string(e.code())), e.what()}));
    return;
  }
  std::ifstream in(resolved, std::ios::binary);
  if (!in || !fs::is_regular_file(resolved)) {
    channel.send_line(encode(ErrorMsg{"FetchFailed", fmt::format("cannot read '{}'", path)}));
    return;
  }
  const auto size = static_cast<std::uint64_t>(fs::file_size(resolved));
  std::uint64_t seq = 0;
  std::vector<std::uint8_t> chunk(kChunkSize);
  while (in) {
    in.read(reinterpret_cast<char*>(chunk.data()), static_cast<std::streamsize>(chunk.size()));
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got == 0) break;
    channel.send_line(encode(Data{path, seq++, {chunk.begin(), chunk.begin() + got}, false, size}));
  }
  channel.send_line(encode(Data{path, seq, {}, true, size}));
}

// --- AgentSession ------------------------------------------------------------------

namespace {

net::Socket connect_address(const std::string& address) {
  auto endpoint = net::parse_endpoint(address);
  if (!endpoint) throw TransportError(ErrorCode::ConnectFailed, fmt::format("bad address '{}'", address));
  return net::connect_tcp(*endpoint);
}

}  // namespace

AgentSession::AgentSession(const std::string& address, Clock& dut_clock, SyncOptions sync)
    : channel_(connect_address(address)), dut_clock_(dut_clock), sync_options_(sync) {}

Message AgentSession::receive() {
  auto line = channel_.read_line(kReplyTimeout);
  if (!line) throw TransportError(ErrorCode::Timeout, "monitor did not answer");
  auto message = decode(*line);
  if (auto* err = std::get_if<ErrorMsg>(&message)) {
    throw TransportError(ErrorCode::ServerError, fmt::format("{}: {}", err->code, err->message));
  }
  return message;
}

ProbeSample AgentSession::probe() {
  const double t1 = to_seconds(dut_clock_.now());
  channel_.send_line(encode(TimeProbe{t1}));
  auto message = receive();
  const double t4 = to_seconds(dut_clock_.now());
  auto* reply = std::get_if<TimeReply>(&message);
  if (reply == nullptr || reply->t1 != t1) violation("expected TIME_REPLY to our probe");
  return ProbeSample{t1, reply->t2, reply->t3, t4};
}

const SyncEstimate& AgentSession::sync() {
  estimate_ = estimate_offset([this] { return probe(); }, sync_options_);
  return *estimate_;
}

void AgentSession::hello(Hello hello) {
  if (!estimate_) sync();
  hello.sync = SyncFields{estimate_->offset, estimate_->rtt, estimate_->dispersion, estimate_->probe_count};
  channel_.send_line(encode(hello));
  auto reply = receive();
  auto* echo = std::get_if<Hello>(&reply);
  if (echo == nullptr || echo->run_id != hello.run_id) violation("expected HELLO acknowledgment");
  run_id_ = hello.run_id;
}

void AgentSession::event(const std::string& label, Timestamp dut_time) {
  if (!estimate_) sync();
  channel_.send_line(encode(Event{run_id_, label, correct_timestamp(dut_time, *estimate_)}));
}

void AgentSession::result(const InferenceResult& result) {
  channel_.send_line(encode(Result{run_id_, result}));
}

std::vector<std::uint8_t> AgentSession::fetch(const std::string& path) {
  channel_.send_line(encode(Fetch{path}));
  std::vector<std::uint8_t> bytes;
  for (std::uint64_t expected_seq = 0;; ++expected_seq) {
    auto message = receive();
    auto* data = std::get_if<Data>(&message);
    if (data == nullptr || data->path != path || data->seq != expected_seq) {
      violation("DATA chunks out of sequence");
    }
    bytes.insert(bytes.end(), data->bytes.begin(), data->bytes.end());
    if (data->eof) {
      if (bytes.size() != data->size) violation("fetched size does not match the announced size");
      return bytes;
    }
  }
}

std::uint64_t AgentSession::end_run() {
  channel_.send_line(encode(EndRun{run_id_, std::nullopt}));
  auto reply = receive();
  auto* end = std::get_if<EndRun>(&reply);
  if (end == nullptr || end->run_id != run_id_) violation("expected END_RUN acknowledgment");
  return end->batch_count.value_or(0);
}

std::uint64_t replay_run(const std::string& address, Clock& dut_clock, const ScriptedRun& script,
                         SyncOptions sync) {
  AgentSession session(address, dut_clock, sync);
  session.hello(script.hello);
  for (const auto& e : script.events) session.event(e.label, e.t);
  for (const auto& r : script.results) session.result(r);
  return session.end_run();
}

}  // namespace edgemeter
