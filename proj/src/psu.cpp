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

#include "edgemeter/psu.hpp"

#include <fcntl.h>
#include <poll.h>
#include <termios.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>

#include <fmt/format.h>

#include "edgemeter/error.hpp"
#include "edgemeter/modbus.hpp"

namespace edgemeter {

// --- SerialPort --------------------------------------------------------------

namespace {

speed_t baud_constant(unsigned baud) {
  switch (baud) {
    case 1200: return B1200;
    case 2400: return B2400;
    case 4800: return B4800;
    case 9600: return B9600;
    case 19200: return B19200;
    case 38400: return B38400;
    case 57600: return B57600;
    case 115200: return B115200;
    default: return B0;
  }
}

[[noreturn]] void open_failed(const std::string& path, const std::string& why) {
  throw TransportError(ErrorCode::PortOpenFailed, fmt::format("{}: {}", path, why));
}

}  // namespace

SerialPort::SerialPort(const std::string& path, const SerialSettings& settings) {
  const speed_t speed = baud_constant(settings.baud);
  if (speed == B0) {
    throw ParseError(ErrorCode::InvalidConfig, fmt::format("unsupported baud rate {}", settings.baud));
  }
  if ((settings.data_bits != 7 && settings.data_bits != 8) ||
      (settings.parity != 'N' && settings.parity != 'E' && settings.parity != 'O') ||
      (settings.stop_bits != 1 && settings.stop_bits != 2)) {
    throw ParseError(ErrorCode::InvalidConfig,
                     fmt::format("unsupported framing {}{}{}", settings.data_bits, settings.parity, settings.stop_bits));
  }
  fd_ = ::open(path.c_str(), O_RDWR | O_NOCTTY | O_NONBLOCK);
  if (fd_ < 0) open_failed(path, std::strerror(errno));

  termios tio{};
  if (::tcgetattr(fd_, &tio) != 0) {
    const std::string why = std::strerror(errno);
    ::close(fd_);
    open_failed(path, why);
  }
  ::cfmakeraw(&tio);
  ::cfsetispeed(&tio, speed);
  ::cfsetospeed(&tio, speed);
  tio.c_cflag &= ~static_cast<tcflag_t>(CSIZE | PARENB | PARODD | CSTOPB);
  tio.c_cflag |= CLOCAL | CREAD;
  tio.c_cflag |= settings.data_bits == 7 ? CS7 : CS8;
  if (settings.parity == 'E') tio.c_cflag |= PARENB;
  if (settings.parity == 'O') tio.c_cflag |= PARENB | PARODD;
  if (settings.stop_bits == 2) tio.c_cflag |= CSTOPB;
  tio.c_cc[VMIN] = 0;
  tio.c_cc[VTIME] = 0;
  if (::tcsetattr(fd_, TCSANOW, &tio) != 0) {
    const std::string why = std::strerror(errno);
    ::close(fd_);
    open_failed(path, why);
  }
}

SerialPort::~SerialPort() {
  if (fd_ >= 0) ::close(fd_);
}

void SerialPort::write(std::span<const std::uint8_t> bytes) {
  std::size_t done = 0;
  while (done < bytes.size()) {
    const auto n = ::write(fd_, bytes.data() + done, bytes.size() - done);
    if (n > 0) {
      done += static_cast<std::size_t>(n);
      continue;
    }
    if (n < 0 && errno != EAGAIN && errno != EINTR) {
      throw TransportError(ErrorCode::Timeout, fmt::format("serial write: {}", std::strerror(errno)));
    }
    pollfd pfd{fd_, POLLOUT, 0};
    ::poll(&pfd, 1, 100);
  }
}

std::size_t SerialPort::read(std::span<std::uint8_t> buffer, Micros timeout) {
  pollfd pfd{fd_, POLLIN, 0};
  const int ms = static_cast<int>(std::max<std::int64_t>(0, (timeout.count() + 999) / 1000));
  const int ready = ::poll(&pfd, 1, ms);
  if (ready <= 0) return 0;
  const auto n = ::read(fd_, buffer.data(), buffer.size());
  return n > 0 ? static_cast<std::size_t>(n) : 0;
}

void SerialPort::discard_input() { ::tcflush(fd_, TCIFLUSH); }

// --- RegisterMap -------------------------------------------------------------

RegisterMap RegisterMap::hm310p_community() { return RegisterMap{}; }

std::optional<RegisterMap> RegisterMap::named(const std::string& name) {
  if (name == "hm310p-community") return hm310p_community();
  return std::nullopt;
}

RegisterMap RegisterMap::from_key_values(const KeyValues& kv) { return from_key_values(kv, RegisterMap{}); }

RegisterMap RegisterMap::from_key_values(const KeyValues& kv, RegisterMap base) {
  RegisterMap m = base;
  auto addr = [&](const char* key, std::uint16_t fallback) {
    const auto v = kv.get_uint(key, fallback);
    if (v > 0xFFFF) {
      throw ParseError(ErrorCode::InvalidConfig, fmt::format("{} does not fit in 16 bits", key));
    }
    return static_cast<std::uint16_t>(v);
  };
  m.voltage_reg = addr("voltage_reg", m.voltage_reg);
  m.current_reg = addr("current_reg", m.current_reg);
  m.power_reg_hi = addr("power_reg_hi", m.power_reg_hi);
  m.power_reg_lo = addr("power_reg_lo", m.power_reg_lo);
  m.output_enable_reg = addr("output_enable_reg", m.output_enable_reg);
  m.set_voltage_reg = addr("set_voltage_reg", m.set_voltage_reg);
  m.set_current_reg = addr("set_current_reg", m.set_current_reg);
  m.voltage_scale = kv.get_double("voltage_scale", m.voltage_scale);
  m.current_scale = kv.get_double("current_scale", m.current_scale);
  m.power_scale = kv.get_double("power_scale", m.power_scale);
  m.validate();
  return m;
}

void RegisterMap::validate() const {
  if (!(voltage_scale > 0) || !(current_scale > 0) || !(power_scale > 0)) {
    throw ParseError(ErrorCode::InvalidConfig, "register scales must be positive");
  }
  if (measurement_count() > modbus::kMaxReadCount) {
    throw ParseError(ErrorCode::InvalidConfig, "measurement registers span more than 125 registers");
  }
}

std::uint16_t RegisterMap::measurement_base() const {
  return std::min({voltage_reg, current_reg, power_reg_hi, power_reg_lo});
}

std::uint16_t RegisterMap::measurement_count() const {
  const auto top = std::max({voltage_reg, current_reg, power_reg_hi, power_reg_lo});
  return static_cast<std::uint16_t>(top - measurement_base() + 1);
}

// --- PsuClient ---------------------------------------------------------------

PsuClient::PsuClient(Port& port, RegisterMap map, DriverOptions options, Clock& clock)
    : port_(port), map_(map), options_(options), clock_(clock) {
  map_.validate();
}

std::vector<std::uint8_t> PsuClient::receive_once(std::uint8_t function) {
  const auto deadline = clock_.now() + options_.timeout;
  std::vector<std::uint8_t> frame;
  auto fill_to = [&](std::size_t want) {
    std::uint8_t chunk[256];
    while (frame.size() < want) {
      const auto remaining = deadline - clock_.now();
      if (remaining < Micros::zero()) {
        throw TransportError(ErrorCode::Timeout, "no response from supply");
      }
      const auto n = port_.read(std::span(chunk, std::min(want - frame.size(), sizeof chunk)), remaining);
      if (n == 0 && clock_.now() >= deadline) {
        throw TransportError(ErrorCode::Timeout, "no response from supply");
      }
      frame.insert(frame.end(), chunk, chunk + n);
    }
  };
  fill_to(3);
  const auto length = modbus::response_length(frame[1], frame[2]);
  if (length == 0) {
    throw TransportError(ErrorCode::ProtocolViolation,
                         fmt::format("unexpected function code 0x{:02x}", frame[1]));
  }
  fill_to(length);
  const auto decoded = modbus::decode(frame);
  if (decoded.unit_id != options_.unit_id) {
    throw TransportError(ErrorCode::ProtocolViolation,
                         fmt::format("response from unit {}, expected {}", decoded.unit_id, options_.unit_id));
  }
  if (decoded.function == (function | modbus::kExceptionFlag)) {
    const auto code = decoded.payload.empty() ? 0 : decoded.payload[0];
    throw TransportError(ErrorCode::ExceptionResponse,
                         fmt::format("device exception 0x{:02x}", code), code);
  }
  if (decoded.function != function) {
    throw TransportError(ErrorCode::ProtocolViolation,
                         fmt::format("response function 0x{:02x}, expected 0x{:02x}", decoded.function, function));
  }
  return decoded.payload;
}

std::vector<std::uint8_t> PsuClient::transact(const std::vector<std::uint8_t>& request,
                                              Timestamp* sent_at) {
  for (unsigned attempt = 0;; ++attempt) {
    port_.discard_input();
    // A retried read is dated by the request that actually produced it.
    if (sent_at != nullptr) *sent_at = clock_.now();
    port_.write(request);
    try {
      return receive_once(request[1]);
    } catch (const TransportError& e) {
      const bool retryable = e.code() == ErrorCode::Timeout || e.code() == ErrorCode::CrcMismatch;
      if (!retryable || attempt >= options_.retries) throw;
    }
  }
}

std::vector<std::uint16_t> PsuClient::registers_from(const std::vector<std::uint8_t>& payload,
                                                     std::uint16_t count) {
  if (payload.empty() || payload[0] != 2 * count || payload.size() != 1u + 2 * count) {
    throw TransportError(ErrorCode::ProtocolViolation, "read response has the wrong byte count");
  }
  std::vector<std::uint16_t> regs(count);
  for (std::size_t i = 0; i < count; ++i) regs[i] = modbus::be16(payload, 1 + 2 * i);
  return regs;
}

std::vector<std::uint16_t> PsuClient::read_registers(std::uint16_t address, std::uint16_t count) {
  return registers_from(transact(modbus::read_holding_request(options_.unit_id, address, count)), count);
}

void PsuClient::write_register(std::uint16_t address, std::uint16_t value) {
  const auto request = modbus::write_single_request(options_.unit_id, address, value);
  const auto payload = transact(request);
  // Write-single responses echo address and value.
  const std::vector<std::uint8_t> expected(request.begin() + 2, request.end() - 2);
  if (payload != expected) {
    throw TransportError(ErrorCode::ProtocolViolation,
                         fmt::format("write echo mismatch for register 0x{:04x}", address));
  }
}

PowerSample PsuClient::read_measurements() {
  const auto base = map_.measurement_base();
  const auto count = map_.measurement_count();
  Timestamp sent;
  const auto payload = transact(modbus::read_holding_request(options_.unit_id, base, count), &sent);
  const auto regs = registers_from(payload, count);
  auto reg = [&](std::uint16_t address) { return regs[address - base]; };
  PowerSample s;
  s.t = sent;
  s.voltage = reg(map_.voltage_reg) / map_.voltage_scale;
  s.current = reg(map_.current_reg) / map_.current_scale;
  const std::uint32_t raw_power =
      (static_cast<std::uint32_t>(reg(map_.power_reg_hi)) << 16) | reg(map_.power_reg_lo);
  s.power = raw_power / map_.power_scale;
  return s;
}

void PsuClient::set_output(bool on) { write_register(map_.output_enable_reg, on ? 1 : 0); }

// --- Waveforms ---------------------------------------------------------------

Waveform constant_power(double watts, double volts) {
  return [=](Timestamp) { return Reading{volts, watts / volts}; };
}

Waveform square_power(double low_watts, double high_watts, double period_s, double volts) {
  const auto period = Micros{std::llround(period_s * 1e6)};
  return [=](Timestamp t) {
    const auto phase = t.time_since_epoch() % period;
    const double watts = phase < period / 2 ? low_watts : high_watts;
    return Reading{volts, watts / volts};
  };
}

Waveform windowed_power(double low_watts, double high_watts,
                        std::vector<std::pair<Timestamp, Timestamp>> busy, double volts) {
  return [=, busy = std::move(busy)](Timestamp t) {
    const bool inside = std::any_of(busy.begin(), busy.end(),
                                    [&](const auto& w) { return w.first <= t && t <= w.second; });
    return Reading{volts, (inside ? high_watts : low_watts) / volts};
  };
}

std::optional<Waveform> waveform_from_spec(const std::string& spec) {
  constexpr std::string_view kConst = "sim:const:";
  constexpr std::string_view kSquare = "sim:square:";
  std::string_view s = spec;
  if (s.starts_with(kConst)) {
    auto w = parse_double(s.substr(kConst.size()));
    if (!w || *w < 0) return std::nullopt;
    return constant_power(*w);
  }
  if (s.starts_with(kSquare)) {
    s.remove_prefix(kSquare.size());
    double v[3];
    for (int i = 0; i < 3; ++i) {
      const auto comma = s.find(',');
      auto value = parse_double(s.substr(0, comma));
      if (!value || *value < 0 || (i < 2 && comma == std::string_view::npos)) return std::nullopt;
      v[i] = *value;
      s = comma == std::string_view::npos ? std::string_view{} : s.substr(comma + 1);
    }
    if (!s.empty() || v[2] <= 0) return std::nullopt;
    return square_power(v[0], v[1], v[2]);
  }
  return std::nullopt;
}

// --- SimulatedPsu ------------------------------------------------------------

SimulatedPsu::SimulatedPsu(Waveform waveform, Clock& clock, RegisterMap map, std::uint8_t unit_id,
                           FaultPlan faults)
    : waveform_(std::move(waveform)), clock_(clock), map_(map), unit_id_(unit_id), faults_(faults) {
  map_.validate();
}

namespace {

std::uint16_t to_register(double value) {
  return static_cast<std::uint16_t>(std::clamp(std::llround(value), 0LL, 0xFFFFLL));
}

}  // namespace

std::optional<std::uint16_t> SimulatedPsu::register_value(std::uint16_t address, Timestamp t) const {
  const Reading r = output_on_ ? waveform_(t) : Reading{};
  const auto raw_power = static_cast<std::uint32_t>(
      std::clamp(std::llround(r.volts * r.amps * map_.power_scale), 0LL, 0xFFFFFFFFLL));
  if (address == map_.voltage_reg) return to_register(r.volts * map_.voltage_scale);
  if (address == map_.current_reg) return to_register(r.amps * map_.current_scale);
  if (address == map_.power_reg_hi) return static_cast<std::uint16_t>(raw_power >> 16);
  if (address == map_.power_reg_lo) return static_cast<std::uint16_t>(raw_power & 0xFFFF);
  if (address == map_.output_enable_reg) return static_cast<std::uint16_t>(output_on_ ? 1 : 0);
  if (address == map_.set_voltage_reg) return set_voltage_;
  if (address == map_.set_current_reg) return set_current_;
  // Unmapped registers inside the measurement block read as zero.
  if (address >= map_.measurement_base() && address < map_.measurement_base() + map_.measurement_count()) return 0;
  return std::nullopt;
}

std::vector<std::uint8_t> SimulatedPsu::respond(std::span<const std::uint8_t> request) {
  modbus::Frame frame;
  try {
    frame = modbus::decode(request);
  } catch (const TransportError&) {
    return {};
  }
  if (frame.unit_id != unit_id_) return {};
  const auto fn = frame.function;
  if (frame.payload.size() != 4) {
    return modbus::exception_response(unit_id_, fn, modbus::kIllegalDataValue);
  }
  const auto address = modbus::be16(frame.payload, 0);
  const auto value = modbus::be16(frame.payload, 2);

  if (fn == modbus::kReadHoldingRegisters) {
    if (value == 0 || value > modbus::kMaxReadCount) {
      return modbus::exception_response(unit_id_, fn, modbus::kIllegalDataValue);
    }
    const Timestamp now = clock_.now();
    std::vector<std::uint8_t> payload{static_cast<std::uint8_t>(2 * value)};
    for (std::uint32_t a = address; a < address + value; ++a) {
      const auto reg = register_value(static_cast<std::uint16_t>(a), now);
      if (!reg) return modbus::exception_response(unit_id_, fn, modbus::kIllegalDataAddress);
      payload.push_back(static_cast<std::uint8_t>(*reg >> 8));
      payload.push_back(static_cast<std::uint8_t>(*reg & 0xFF));
    }
    return modbus::encode(modbus::make_frame(unit_id_, fn, std::move(payload)));
  }
  if (fn == modbus::kWriteSingleRegister) {
    if (address == map_.output_enable_reg) {
      output_on_ = value != 0;
    } else if (address == map_.set_voltage_reg) {
      set_voltage_ = value;
    } else if (address == map_.set_current_reg) {
      set_current_ = value;
    } else {
      return modbus::exception_response(unit_id_, fn, modbus::kIllegalDataAddress);
    }
    return std::vector<std::uint8_t>(request.begin(), request.end());
  }
  return modbus::exception_response(unit_id_, fn, modbus::kIllegalFunction);
}

void SimulatedPsu::write(std::span<const std::uint8_t> bytes) {
  std::lock_guard lock(mutex_);
  // RTU frames are delimited by line silence; each write() is one frame.
  auto response = respond(bytes);
  if (response.empty()) return;
  if (faults_.exception_code) {
    response = modbus::exception_response(unit_id_, bytes[1], *faults_.exception_code);
  } else if (faults_.wrong_echo_address && bytes[1] == modbus::kWriteSingleRegister) {
    auto frame = modbus::decode(response);
    const auto address = static_cast<std::uint16_t>(modbus::be16(frame.payload, 0) + 1);
    frame.payload[0] = static_cast<std::uint8_t>(address >> 8);
    frame.payload[1] = static_cast<std::uint8_t>(address & 0xFF);
    response = modbus::encode(modbus::make_frame(frame.unit_id, frame.function, frame.payload));
  }
  ++responses_;
  if (faults_.drop_every != 0 && responses_ % faults_.drop_every == 0) {
    ++dropped_;
    return;
  }
  if (faults_.corrupt_crc_every != 0 && responses_ % faults_.corrupt_crc_every == 0) {
    response.back() ^= 0xFF;
  }
  outbound_.insert(outbound_.end(), response.begin(), response.end());
  ready_at_ = clock_.now() + faults_.latency;
}

std::size_t SimulatedPsu::read(std::span<std::uint8_t> buffer, Micros timeout) {
  Timestamp ready;
  {
    std::lock_guard lock(mutex_);
    if (outbound_.empty() || ready_at_ > clock_.now() + timeout) {
      ready = Timestamp::max();
    } else {
      ready = ready_at_;
    }
  }
  if (ready == Timestamp::max()) {
    clock_.sleep_for(timeout);
    return 0;
  }
  clock_.sleep_until(ready);
  std::lock_guard lock(mutex_);
  const auto n = std::min(buffer.size(), outbound_.size());
  std::copy_n(outbound_.begin(), n, buffer.begin());
  outbound_.erase(outbound_.begin(), outbound_.begin() + static_cast<std::ptrdiff_t>(n));
  return n;
}

void SimulatedPsu::discard_input() {
  std::lock_guard lock(mutex_);
  outbound_.clear();
}

bool SimulatedPsu::output_enabled() const {
  std::lock_guard lock(mutex_);
  return output_on_;
}

std::uint64_t SimulatedPsu::responses() const {
  std::lock_guard lock(mutex_);
  return responses_;
}

std::uint64_t SimulatedPsu::dropped() const {
  std::lock_guard lock(mutex_);
  return dropped_;
}

void SimulatedPsu::set_faults(FaultPlan faults) {
  std::lock_guard lock(mutex_);
  faults_ = faults;
}

std::unique_ptr<Port> open_port(const std::string& spec, Clock& clock, const RegisterMap& map,
                                std::uint8_t unit_id, const SerialSettings& serial) {
  if (spec.starts_with("sim:")) {
    auto waveform = waveform_from_spec(spec);
    if (!waveform) {
      throw ParseError(ErrorCode::InvalidConfig, fmt::format("bad simulator spec '{}'", spec));
    }
    return std::make_unique<SimulatedPsu>(std::move(*waveform), clock, map, unit_id);
  }
  return std::make_unique<SerialPort>(spec, serial);
}

}  // namespace edgemeter
