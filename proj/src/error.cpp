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

#include "edgemeter/error.hpp"

namespace edgemeter {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::NonMonotonicTime: return "NonMonotonicTime";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::DuplicateLabel: return "DuplicateLabel";
    case ErrorCode::UnpairedLabel: return "UnpairedLabel";
    case ErrorCode::OverlappingIntervals: return "OverlappingIntervals";
    case ErrorCode::InvertedInterval: return "InvertedInterval";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::CrcMismatch: return "CrcMismatch";
    case ErrorCode::ExceptionResponse: return "ExceptionResponse";
    case ErrorCode::ProtocolViolation: return "ProtocolViolation";
    case ErrorCode::PortOpenFailed: return "PortOpenFailed";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ProbeTimeout: return "ProbeTimeout";
    case ErrorCode::ClockSkewTooLarge: return "ClockSkewTooLarge";
    case ErrorCode::AddressInUse: return "AddressInUse";
    case ErrorCode::FetchOutsideRoot: return "FetchOutsideRoot";
    case ErrorCode::FetchFailed: return "FetchFailed";
    case ErrorCode::ConnectFailed: return "ConnectFailed";
    case ErrorCode::ServerError: return "ServerError";
    case ErrorCode::SamplerDied: return "SamplerDied";
    case ErrorCode::WindowTooSparse: return "WindowTooSparse";
    case ErrorCode::WindowOverlapsInference: return "WindowOverlapsInference";
    case ErrorCode::NoIntervals: return "NoIntervals";
    case ErrorCode::AllBatchesEmpty: return "AllBatchesEmpty";
    case ErrorCode::MissingGroundTruth: return "MissingGroundTruth";
    case ErrorCode::TopKTooShort: return "TopKTooShort";
    case ErrorCode::ManifestMismatch: return "ManifestMismatch";
    case ErrorCode::IntervalOutsideTestWindow: return "IntervalOutsideTestWindow";
    case ErrorCode::RateExceedsMax: return "RateExceedsMax";
    case ErrorCode::InvalidProfile: return "InvalidProfile";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::int64_t detail,
             std::int64_t detail2)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      detail_(detail),
      detail2_(detail2) {}

}  // namespace edgemeter
