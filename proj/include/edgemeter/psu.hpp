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
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edgemeter/clock.hpp"
#include "edgemeter/keyvalue.hpp"
#include "edgemeter/measurement.hpp"

namespace edgemeter {

/// Byte stream to a Modbus device. A port is owned by one requester at a
/// time; it may move between threads but is never shared concurrently.
class Port {
 public:
  virtual ~Port() = default;
  virtual void write(std::span<const std::uint8_t> bytes) = 0;
  /// Blocks until at least one byte is available or `timeout` elapses.
  /// Returns the number of bytes copied, 0 on timeout.
  virtual std::size_t read(std::span<std::uint8_t> buffer, Micros timeout) = 0;
  virtual void discard_input() = 0;
};

struct SerialSettings {
  unsigned baud = 9600;
  unsigned data_bits = 8;
  char parity = 'N';  // N, E or O
  unsigned stop_bits = 1;
};

/// POSIX tty (USB-serial adapter, or a pty in tests).
class SerialPort final : public Port {
 public:
  SerialPort(const std::string& path, const SerialSettings& settings = {});
  ~SerialPort() override;
  SerialPort(const SerialPort&) = delete;
  SerialPort& operator=(const SerialPort&) = delete;

  void write(std::span<const std::uint8_t> bytes) override;
  std::size_t read(std::span<std::uint8_t> buffer, Micros timeout) override;
  void discard_input() override;

 private:
  int fd_ = -1;
};

/// Where the supply keeps its readings and controls. Measurement values are
/// register value divided by scale.
struct RegisterMap {
  std::uint16_t voltage_reg = 0x0010;
  std::uint16_t current_reg = 0x0011;
  std::uint16_t power_reg_hi = 0x0012;
  std::uint16_t power_reg_lo = 0x0013;
  std::uint16_t output_enable_reg = 0x0001;
  std::uint16_t set_voltage_reg = 0x0030;
  std::uint16_t set_current_reg = 0x0031;
  double voltage_scale = 100.0;
  double current_scale = 1000.0;
  double power_scale = 1000.0;

  /// The community-documented HM310P layout (the defaults above).
  static RegisterMap hm310p_community();
  /// Looks up a built-in profile by name; nullopt when unknown.
  static std::optional<RegisterMap> named(const std::string& name);
  /// Starts from `base` (the defaults if omitted) and overrides any key present.
  static RegisterMap from_key_values(const KeyValues& kv);
  static RegisterMap from_key_values(const KeyValues& kv, RegisterMap base);

  /// Throws InvalidConfig for non-positive scales or a measurement block
  /// wider than one read request.
  void validate() const;
  std::uint16_t measurement_base() const;
  std::uint16_t measurement_count() const;

  bool operator==(const RegisterMap&) const = default;
};

struct DriverOptions {
  std::uint8_t unit_id = 1;
  Micros timeout{200'000};
  unsigned retries = 2;  // extra attempts after Timeout or CrcMismatch
};

/// Modbus-RTU master for a single supply. Serializes request/response pairs.
class PsuClient {
 public:
  PsuClient(Port& port, RegisterMap map, DriverOptions options, Clock& clock);

  /// One reading, stamped on `clock` when the successful request was sent.
  PowerSample read_measurements();
  void set_output(bool on);
  std::vector<std::uint16_t> read_registers(std::uint16_t address, std::uint16_t count);
  void write_register(std::uint16_t address, std::uint16_t value);

  const RegisterMap& register_map() const { return map_; }

 private:
  std::vector<std::uint8_t> transact(const std::vector<std::uint8_t>& request,
                                     Timestamp* sent_at = nullptr);
  static std::vector<std::uint16_t> registers_from(const std::vector<std::uint8_t>& payload,
                                                   std::uint16_t count);
  std::vector<std::uint8_t> receive_once(std::uint8_t function);

  Port& port_;
  RegisterMap map_;
  DriverOptions options_;
  Clock& clock_;
};

struct Reading {
  double volts = 0.0;
  double amps = 0.0;
};

/// Output of a simulated supply as a function of monitor time.
using Waveform = std::function<Reading(Timestamp)>;

Waveform constant_power(double watts, double volts = 5.0);
/// Alternates `low` and `high` watts with the given period, starting low at
/// the epoch: t mod period in [0, period/2) is low, the rest high.
Waveform square_power(double low_watts, double high_watts, double period_s, double volts = 5.0);
/// Busy (`high`) inside any listed window, inclusive of both ends, else `low`.
Waveform windowed_power(double low_watts, double high_watts,
                        std::vector<std::pair<Timestamp, Timestamp>> busy, double volts = 5.0);
/// Parses `sim:const:<W>` and `sim:square:<low>,<high>,<period>`.
std::optional<Waveform> waveform_from_spec(const std::string& spec);

struct FaultPlan {
  unsigned drop_every = 0;         // withhold every n-th response
  unsigned corrupt_crc_every = 0;  // flip the CRC high byte of every n-th response
  std::optional<std::uint8_t> exception_code{};  // answer everything with this exception
  bool wrong_echo_address = false;             // echo writes with address + 1
  Micros latency{0};                           // delay before a response is readable
};

/// In-process supply answering Modbus RTU frames exactly like the device,
/// with register contents derived from a waveform.
class SimulatedPsu final : public Port {
 public:
  SimulatedPsu(Waveform waveform, Clock& clock, RegisterMap map = RegisterMap::hm310p_community(),
               std::uint8_t unit_id = 1, FaultPlan faults = {});

  void write(std::span<const std::uint8_t> bytes) override;
  std::size_t read(std::span<std::uint8_t> buffer, Micros timeout) override;
  void discard_input() override;

  /// Pure request handler: the response bytes the device would send, or
  /// empty when it would stay silent (foreign unit id, bad CRC). Ignores
  /// the fault plan.
  std::vector<std::uint8_t> respond(std::span<const std::uint8_t> request);

  bool output_enabled() const;
  std::uint64_t responses() const;
  std::uint64_t dropped() const;
  void set_faults(FaultPlan faults);

 private:
  std::optional<std::uint16_t> register_value(std::uint16_t address, Timestamp t) const;

  Waveform waveform_;
  Clock& clock_;
  RegisterMap map_;
  std::uint8_t unit_id_;
  FaultPlan faults_;

  mutable std::mutex mutex_;
  std::vector<std::uint8_t> inbound_;
  std::deque<std::uint8_t> outbound_;
  Timestamp ready_at_{};
  bool output_on_ = true;
  std::uint16_t set_voltage_ = 0;
  std::uint16_t set_current_ = 0;
  std::uint64_t responses_ = 0;
  std::uint64_t dropped_ = 0;
};

/// Opens `sim:...` specs as a SimulatedPsu on `clock`, anything else as a
/// serial device. Throws TransportError(PortOpenFailed).
std::unique_ptr<Port> open_port(const std::string& spec, Clock& clock, const RegisterMap& map,
                                std::uint8_t unit_id = 1, const SerialSettings& serial = {});

}  // namespace edgemeter
