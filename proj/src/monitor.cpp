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

#include "edgemeter/monitor.hpp"

#include <fmt/format.h>

#include "edgemeter/error.hpp"

namespace edgemeter {

Micros expected_round_trip(unsigned baud, std::uint16_t register_count) {
  const double bytes = 8.0 + 5.0 + 2.0 * register_count;
  return Micros{static_cast<std::int64_t>(bytes * 10.0 / baud * 1e6)};
}

std::optional<std::string> interval_warning(Micros interval, unsigned baud, std::uint16_t register_count) {
  const auto rtt = expected_round_trip(baud, register_count);
  if (interval >= 2 * rtt) return std::nullopt;
  return fmt::format("sampling interval {:.3f} s is below twice the serial round trip ({:.3f} s at {} baud)",
                     to_seconds(interval), to_seconds(rtt), baud);
}

Sampler::Sampler(PsuClient& client, Clock& clock, const std::filesystem::path& out_path,
                 Micros interval, unsigned max_consecutive_failures, std::ostream* live)
    : client_(client),
      clock_(clock),
      interval_(interval),
      max_failures_(max_consecutive_failures),
      live_(live) {
  if (interval <= Micros::zero()) throw std::invalid_argument("sampling interval must be positive");
  out_.reset(std::fopen(out_path.c_str(), "wb"));
  if (!out_) {
    throw ParseError(ErrorCode::FileNotFound, fmt::format("cannot create {}", out_path.string()));
  }
}

Sampler::~Sampler() {
  request_stop();
  if (thread_.joinable()) thread_.join();
}

void Sampler::record(const PowerSample& s) {
  const auto line = format_power_line(s);
  // One write per complete line, flushed, so readers never see a torn line.
  std::fwrite(line.data(), 1, line.size(), out_.get());
  std::fflush(out_.get());
  last_t_ = s.t;
  ++samples_;
  if (live_ != nullptr) {
    *live_ << fmt::format("\r{}  {:8.3f} W  {:7.3f} V  {:7.3f} A  samples={} gaps={}   ",
                          format_timestamp(s.t), s.power, s.voltage, s.current, samples_.load(),
                          gaps_.load())
           << std::flush;
  }
}

SamplerStats Sampler::run_until(Timestamp until) {
  unsigned consecutive = 0;
  Timestamp next = clock_.now();
  while (!stop_ && next < until) {
    clock_.sleep_until(next);
    if (stop_) break;
    try {
      const auto s = client_.read_measurements();
      if (last_t_ && s.t <= *last_t_) {
        // The wall clock stepped backwards; keep the file strictly ordered.
        ++gaps_;
      } else {
        record(s);
      }
      consecutive = 0;
    } catch (const TransportError& e) {
      ++gaps_;
      if (++consecutive > max_failures_) {
        throw AnalysisError(ErrorCode::SamplerDied,
                            fmt::format("{} consecutive failed reads, last: {}", consecutive, e.what()));
      }
    }
    next += interval_;
    const auto now = clock_.now();
    if (next < now) {
      // Skip ticks lost to a slow exchange instead of bursting to catch up.
      const auto behind = (now - next) / interval_ + 1;
      next += behind * interval_;
    }
  }
  return stats();
}

void Sampler::start() {
  thread_ = std::thread([this] {
    try {
      run_until(Timestamp::max());
    } catch (...) {
      failure_ = std::current_exception();
    }
  });
}

SamplerStats Sampler::stop() {
  request_stop();
  if (thread_.joinable()) thread_.join();
  if (failure_) std::rethrow_exception(failure_);
  return stats();
}

SamplerStats Sampler::stats() const { return {samples_.load(), gaps_.load()}; }

std::optional<TimeRange> parse_time_range(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  auto a = parse_timestamp(text.substr(0, colon));
  auto b = parse_timestamp(text.substr(colon + 1));
  if (!a || !b || *b < *a) return std::nullopt;
  return TimeRange{*a, *b};
}

double measure_idle(std::span<const PowerSample> samples, const TimeRange& window,
                    std::span<const BatchInterval> intervals) {
  for (const auto& iv : intervals) {
    if (iv.start <= window.end && iv.end >= window.start) {
      throw AnalysisError(ErrorCode::WindowOverlapsInference,
                          fmt::format("idle window intersects batch {}", iv.index),
                          static_cast<std::int64_t>(iv.index));
    }
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& s : samples) {
    if (window.start <= s.t && s.t <= window.end) {
      sum += s.power;
      ++count;
    }
  }
  if (count < kMinIdleSamples) {
    throw AnalysisError(ErrorCode::WindowTooSparse,
                        fmt::format("idle window holds {} samples, need {}", count, kMinIdleSamples),
                        static_cast<std::int64_t>(count));
  }
  return sum / static_cast<double>(count);
}

}  // namespace edgemeter
