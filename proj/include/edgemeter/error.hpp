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
#include <stdexcept>
#include <string>
#include <string_view>

namespace edgemeter {

enum class ErrorCode {
  // file formats
  FileNotFound,
  MalformedLine,
  NonMonotonicTime,
  UnknownLabel,
  DuplicateLabel,
  UnpairedLabel,
  OverlappingIntervals,
  InvertedInterval,
  // psu / modbus
  Timeout,
  CrcMismatch,
  ExceptionResponse,
  ProtocolViolation,
  PortOpenFailed,
  InvalidConfig,
  // timesync
  ProbeTimeout,
  ClockSkewTooLarge,
  // agent protocol
  AddressInUse,
  FetchOutsideRoot,
  FetchFailed,
  ConnectFailed,
  ServerError,
  // monitor
  SamplerDied,
  WindowTooSparse,
  WindowOverlapsInference,
  // aggregate
  NoIntervals,
  AllBatchesEmpty,
  MissingGroundTruth,
  TopKTooShort,
  ManifestMismatch,
  IntervalOutsideTestWindow,
  // predict
  RateExceedsMax,
  InvalidProfile,
  // report
  EmptyTrace,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every failure surfaced by the library. Carries a
/// machine-readable code plus up to two integer details (line number,
/// batch index, Modbus exception code...), whose meaning depends on the code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::int64_t detail = -1,
        std::int64_t detail2 = -1);

  ErrorCode code() const noexcept { return code_; }
  std::int64_t detail() const noexcept { return detail_; }
  std::int64_t detail2() const noexcept { return detail2_; }

 private:
  ErrorCode code_;
  std::int64_t detail_;
  std::int64_t detail2_;
};

/// Failures in parsing input files. detail() is the 1-based line number
/// where one applies.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Failures talking to the power supply or the agent over a transport.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// Failures of the analysis and prediction engines on well-formed input.
class AnalysisError : public Error {
 public:
  using Error::Error;
};

}  // namespace edgemeter
