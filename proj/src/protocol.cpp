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

#include "edgemeter/protocol.hpp"

#include <array>

#include <fmt/format.h>
#include <json.hpp>

#include "edgemeter/error.hpp"

namespace edgemeter::protocol {

namespace {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void violation(const std::string& why) {
  throw TransportError(ErrorCode::ProtocolViolation, why);
}

}  // namespace

std::string_view kind_name(const Message& m) {
  static constexpr std::array<std::string_view, 9> kNames = {
      "HELLO", "TIME_PROBE", "TIME_REPLY", "EVENT", "RESULT", "FETCH", "DATA", "END_RUN", "ERROR"};
  return kNames[m.index()];
}

std::string encode(const Message& m) {
  ordered j;
  j["kind"] = kind_name(m);
  std::visit(overloaded{
                 [&](const Hello& h) {
                   j["run_id"] = h.run_id;
                   j["device"] = h.device;
                   j["model"] = h.model;
                   j["batch_count"] = h.batch_count;
                   j["batch_size"] = h.batch_size;
                   if (h.sync) {
                     j["clock_offset"] = h.sync->clock_offset;
                     j["clock_rtt"] = h.sync->clock_rtt;
                     j["clock_dispersion"] = h.sync->clock_dispersion;
                     j["probe_count"] = h.sync->probe_count;
                   }
                 },
                 [&](const TimeProbe& p) { j["t1"] = p.t1; },
                 [&](const TimeReply& r) {
                   j["t1"] = r.t1;
                   j["t2"] = r.t2;
                   j["t3"] = r.t3;
                 },
                 [&](const Event& e) {
                   j["run_id"] = e.run_id;
                   j["label"] = e.label;
                   j["time_s"] = to_seconds(e.time);
                 },
                 [&](const Result& r) {
                   j["run_id"] = r.run_id;
                   j["sample_id"] = r.result.sample_id;
                   ordered topk = ordered::array();
                   for (const auto& cs : r.result.topk) topk.push_back({cs.class_index, cs.score});
                   j["topk"] = std::move(topk);
                 },
                 [&](const Fetch& f) { j["path"] = f.path; },
                 [&](const Data& d) {
                   j["path"] = d.path;
                   j["seq"] = d.seq;
                   j["data"] = base64_encode(d.bytes);
                   j["eof"] = d.eof;
                   j["size"] = d.size;
                 },
                 [&](const EndRun& e) {
                   j["run_id"] = e.run_id;
                   if (e.batch_count) j["batch_count"] = *e.batch_count;
                 },
                 [&](const ErrorMsg& e) {
                   j["code"] = e.code;
                   j["message"] = e.message;
                 },
             },
             m);
  return j.dump();
}

Message decode(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    violation(fmt::format("unparseable line: {}", e.what()));
  }
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    violation("message without a kind");
  }
  const auto kind = j["kind"].get<std::string>();
  try {
    if (kind == "HELLO") {
      Hello h{j.at("run_id").get<std::string>(), j.at("device").get<std::string>(),
              j.at("model").get<std::string>(), j.at("batch_count").get<std::uint64_t>(),
              j.at("batch_size").get<std::uint64_t>(), std::nullopt};
      if (j.contains("clock_offset")) {
        h.sync = SyncFields{j.at("clock_offset").get<double>(), j.at("clock_rtt").get<double>(),
                            j.at("clock_dispersion").get<double>(),
                            j.at("probe_count").get<std::uint64_t>()};
      }
      return h;
    }
    if (kind == "TIME_PROBE") return TimeProbe{j.at("t1").get<double>()};
    if (kind == "TIME_REPLY") {
      return TimeReply{j.at("t1").get<double>(), j.at("t2").get<double>(), j.at("t3").get<double>()};
    }
    if (kind == "EVENT") {
      const double t = j.at("time_s").get<double>();
      if (!(t >= 0.0)) violation("negative event time");
      return Event{j.at("run_id").get<std::string>(), j.at("label").get<std::string>(),
                   timestamp_from_seconds(t)};
    }
    if (kind == "RESULT") {
      Result r{j.at("run_id").get<std::string>(), {j.at("sample_id").get<std::string>(), {}}};
      for (const auto& pair : j.at("topk")) {
        if (!pair.is_array() || pair.size() != 2) violation("topk entries must be [index, score]");
        r.result.topk.push_back({pair[0].get<std::int64_t>(), pair[1].get<double>()});
      }
      return r;
    }
    if (kind == "FETCH") return Fetch{j.at("path").get<std::string>()};
    if (kind == "DATA") {
      auto bytes = base64_decode(j.at("data").get<std::string>());
      if (!bytes) violation("DATA payload is not valid base64");
      return Data{j.at("path").get<std::string>(), j.at("seq").get<std::uint64_t>(), std::move(*bytes),
                  j.at("eof").get<bool>(), j.at("size").get<std::uint64_t>()};
    }
    if (kind == "END_RUN") {
      EndRun e{j.at("run_id").get<std::string>(), std::nullopt};
      if (j.contains("batch_count")) e.batch_count = j["batch_count"].get<std::uint64_t>();
      return e;
    }
    if (kind == "ERROR") {
      return ErrorMsg{j.at("code").get<std::string>(), j.at("message").get<std::string>()};
    }
  } catch (const json::exception& e) {
    violation(fmt::format("{} message: {}", kind, e.what()));
  }
  violation(fmt::format("unknown kind '{}'", kind));
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  const auto rest = bytes.size() - i;
  if (rest == 1) {
    const std::uint32_t v = bytes[i] << 16;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += "==";
  } else if (rest == 2) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::optional<std::vector<std::uint8_t>> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) return std::nullopt;
  auto value = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    const bool last = i + 4 == text.size();
    int pad = 0;
    std::uint32_t v = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=' && last && k >= 2) {
        ++pad;
        v <<= 6;
        continue;
      }
      const int d = value(c);
      if (d < 0 || pad > 0) return std::nullopt;
      v = (v << 6) | static_cast<std::uint32_t>(d);
    }
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  }
  return out;
}

}  // namespace edgemeter::protocol
