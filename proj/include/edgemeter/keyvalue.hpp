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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace edgemeter {

/// Flat `key = value` text, one pair per line. `#` starts a comment line,
/// values may be double-quoted. This is a strict subset of TOML, so profile
/// files can be named `*.toml` and still be edited with TOML tooling.
class KeyValues {
 public:
  static KeyValues parse(std::string_view content);
  static KeyValues load(const std::filesystem::path& path);

  bool contains(const std::string& key) const { return values_.count(key) > 0; }
  std::optional<std::string> get(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  /// Accepts decimal or 0x-prefixed hex.
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  double require_double(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return values_; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace edgemeter
