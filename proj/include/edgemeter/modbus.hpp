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
#include <span>
#include <vector>

namespace edgemeter::modbus {

inline constexpr std::uint8_t kReadHoldingRegisters = 0x03;
inline constexpr std::uint8_t kWriteSingleRegister = 0x06;
inline constexpr std::uint8_t kExceptionFlag = 0x80;
inline constexpr std::uint16_t kMaxReadCount = 125;

// Standard exception codes.
inline constexpr std::uint8_t kIllegalFunction = 0x01;
inline constexpr std::uint8_t kIllegalDataAddress = 0x02;
inline constexpr std::uint8_t kIllegalDataValue = 0x03;

/// CRC-16/MODBUS: reflected polynomial 0xA001, initial value 0xFFFF.
std::uint16_t crc16(std::span<const std::uint8_t> bytes);

/// One RTU frame. On the wire: unit_id, function, payload, crc low, crc high.
struct Frame {
  std::uint8_t unit_id = 0;
  std::uint8_t function = 0;
  std::vector<std::uint8_t> payload;
  std::uint16_t crc = 0;

  bool operator==(const Frame&) const = default;
};

Frame make_frame(std::uint8_t unit_id, std::uint8_t function, std::vector<std::uint8_t> payload);
std::vector<std::uint8_t> encode(const Frame& frame);
/// Throws TransportError(CrcMismatch) or TransportError(ProtocolViolation)
/// for frames shorter than four bytes.
Frame decode(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_holding_request(std::uint8_t unit_id, std::uint16_t address,
                                               std::uint16_t count);
std::vector<std::uint8_t> write_single_request(std::uint8_t unit_id, std::uint16_t address,
                                               std::uint16_t value);
std::vector<std::uint8_t> exception_response(std::uint8_t unit_id, std::uint8_t function,
                                             std::uint8_t code);

/// Total length of a response frame, given its first three bytes. Returns 0
/// for a function code this client never issues.
std::size_t response_length(std::uint8_t function, std::uint8_t third_byte);

inline std::uint16_t be16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>((b[at] << 8) | b[at + 1]);
}

}  // namespace edgemeter::modbus
