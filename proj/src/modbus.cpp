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

#include "edgemeter/modbus.hpp"

#include <array>

#include "edgemeter/error.hpp"

namespace edgemeter::modbus {

namespace {

constexpr std::array<std::uint16_t, 256> make_table() {
  std::array<std::uint16_t, 256> table{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint16_t crc = static_cast<std::uint16_t>(i);
    for (int bit = 0; bit < 8; ++bit) {
      crc = (crc & 1) ? static_cast<std::uint16_t>((crc >> 1) ^ 0xA001) : static_cast<std::uint16_t>(crc >> 1);
    }
    table[i] = crc;
  }
  return table;
}

constexpr auto kTable = make_table();

void push_be16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

}  // namespace

std::uint16_t crc16(std::span<const std::uint8_t> bytes) {
  std::uint16_t crc = 0xFFFF;
  for (std::uint8_t b : bytes) {
    crc = static_cast<std::uint16_t>((crc >> 8) ^ kTable[(crc ^ b) & 0xFF]);
  }
  return crc;
}

Frame make_frame(std::uint8_t unit_id, std::uint8_t function, std::vector<std::uint8_t> payload) {
  Frame f{unit_id, function, std::move(payload), 0};
  const auto wire = encode(f);
  f.crc = crc16(std::span(wire).first(wire.size() - 2));
  return f;
}

std::vector<std::uint8_t> encode(const Frame& frame) {
  std::vector<std::uint8_t> out;
  out.reserve(frame.payload.size() + 4);
  out.push_back(frame.unit_id);
  out.push_back(frame.function);
  out.insert(out.end(), frame.payload.begin(), frame.payload.end());
  out.push_back(static_cast<std::uint8_t>(frame.crc & 0xFF));
  out.push_back(static_cast<std::uint8_t>(frame.crc >> 8));
  return out;
}

Frame decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) {
    throw TransportError(ErrorCode::ProtocolViolation, "frame shorter than 4 bytes");
  }
  const auto body = bytes.first(bytes.size() - 2);
  const auto wire_crc = static_cast<std::uint16_t>(bytes[bytes.size() - 2] | (bytes.back() << 8));
  if (crc16(body) != wire_crc) {
    throw TransportError(ErrorCode::CrcMismatch, "frame CRC does not match");
  }
  return Frame{bytes[0], bytes[1], {body.begin() + 2, body.end()}, wire_crc};
}

std::vector<std::uint8_t> read_holding_request(std::uint8_t unit_id, std::uint16_t address,
                                               std::uint16_t count) {
  std::vector<std::uint8_t> payload;
  push_be16(payload, address);
  push_be16(payload, count);
  return encode(make_frame(unit_id, kReadHoldingRegisters, std::move(payload)));
}

std::vector<std::uint8_t> write_single_request(std::uint8_t unit_id, std::uint16_t address,
                                               std::uint16_t value) {
  std::vector<std::uint8_t> payload;
  push_be16(payload, address);
  push_be16(payload, value);
  return encode(make_frame(unit_id, kWriteSingleRegister, std::move(payload)));
}

std::vector<std::uint8_t> exception_response(std::uint8_t unit_id, std::uint8_t function,
                                             std::uint8_t code) {
  return encode(make_frame(unit_id, static_cast<std::uint8_t>(function | kExceptionFlag), {code}));
}

std::size_t response_length(std::uint8_t function, std::uint8_t third_byte) {
  if (function & kExceptionFlag) return 5;
  switch (function) {
    case kReadHoldingRegisters: return 5u + third_byte;
    case kWriteSingleRegister: return 8;
    default: return 0;
  }
}

}  // namespace edgemeter::modbus
