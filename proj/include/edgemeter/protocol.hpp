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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "edgemeter/measurement.hpp"

namespace edgemeter::protocol {

/// Pre-encoding size of one DATA chunk.
inline constexpr std::size_t kChunkSize = 64 * 1024;
/// Longest line either side accepts; a full chunk encodes to ~87 KiB.
inline constexpr std::size_t kMaxLineLength = 1024 * 1024;

struct SyncFields {
  double clock_offset = 0.0;
  double clock_rtt = 0.0;
  double clock_dispersion = 0.0;
  std::uint64_t probe_count = 0;

  bool operator==(const SyncFields&) const = default;
};

struct Hello {
  std::string run_id;
  std::string device;
  std::string model;
  std::uint64_t batch_count = 0;
  std::uint64_t batch_size = 1;
  std::optional<SyncFields> sync;

  bool operator==(const Hello&) const = default;
};

struct TimeProbe {
  double t1 = 0.0;
  bool operator==(const TimeProbe&) const = default;
};

struct TimeReply {
  double t1 = 0.0;
  double t2 = 0.0;
  double t3 = 0.0;
  bool operator==(const TimeReply&) const = default;
};

struct Event {
  std::string run_id;
  std::string label;
  Timestamp time;  // monitor clock
  bool operator==(const Event&) const = default;
};

struct Result {
  std::string run_id;
  InferenceResult result;
  bool operator==(const Result&) const = default;
};

struct Fetch {
  std::string path;
  bool operator==(const Fetch&) const = default;
};

/// One chunk of a fetched file. The last message for a path has eof set
/// and an empty payload; `size` is the whole file's length throughout.
struct Data {
  std::string path;
  std::uint64_t seq = 0;
  std::vector<std::uint8_t> bytes;
  bool eof = false;
  std::uint64_t size = 0;
  bool operator==(const Data&) const = default;
};

struct EndRun {
  std::string run_id;
  std::optional<std::uint64_t> batch_count;  // set in the monitor's reply
  bool operator==(const EndRun&) const = default;
};

struct ErrorMsg {
  std::string code;
  std::string message;
  bool operator==(const ErrorMsg&) const = default;
};

using Message = std::variant<Hello, TimeProbe, TimeReply, Event, Result, Fetch, Data, EndRun, ErrorMsg>;

std::string_view kind_name(const Message& m);

/// One JSON object, no trailing newline.
std::string encode(const Message& m);
/// Throws TransportError(ProtocolViolation) on anything that is not a
/// well-formed message.
Message decode(std::string_view line);

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// nullopt on invalid characters or length.
std::optional<std::vector<std::uint8_t>> base64_decode(std::string_view text);

}  // namespace edgemeter::protocol
