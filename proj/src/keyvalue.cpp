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

#include "edgemeter/keyvalue.hpp"

#include <charconv>

#include <fmt/format.h>

#include "edgemeter/error.hpp"
#include "edgemeter/measurement.hpp"

namespace edgemeter {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw ParseError(ErrorCode::InvalidConfig, fmt::format("key '{}': bad value '{}'", key, value));
}

}  // namespace

KeyValues KeyValues::parse(std::string_view content) {
  KeyValues kv;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    ++number;
    auto eol = content.find('\n', pos);
    if (eol == std::string_view::npos) eol = content.size();
    auto line = trim(content.substr(pos, eol - pos));
    pos = eol + 1;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(ErrorCode::InvalidConfig, fmt::format("line {}: expected key = value", number),
                       static_cast<std::int64_t>(number));
    }
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"') {
      const auto close = value.find('"', 1);
      if (close == std::string_view::npos) {
        throw ParseError(ErrorCode::InvalidConfig, fmt::format("line {}: unterminated string", number),
                         static_cast<std::int64_t>(number));
      }
      value = value.substr(1, close - 1);
    } else if (const auto hash = value.find(" #"); hash != std::string_view::npos) {
      value = trim(value.substr(0, hash));
    }
    if (key.empty()) {
      throw ParseError(ErrorCode::InvalidConfig, fmt::format("line {}: empty key", number),
                       static_cast<std::int64_t>(number));
    }
    if (!kv.values_.emplace(std::string(key), std::string(value)).second) {
      throw ParseError(ErrorCode::InvalidConfig, fmt::format("line {}: duplicate key '{}'", number, key),
                       static_cast<std::int64_t>(number));
    }
  }
  return kv;
}

KeyValues KeyValues::load(const std::filesystem::path& path) { return parse(read_file(path)); }

std::optional<std::string> KeyValues::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValues::get_string(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

double KeyValues::get_double(const std::string& key, double fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  auto d = parse_double(*v);
  if (!d) bad_value(key, *v);
  return *d;
}

double KeyValues::require_double(const std::string& key) const {
  auto v = get(key);
  if (!v) throw ParseError(ErrorCode::InvalidConfig, fmt::format("missing key '{}'", key));
  return get_double(key, 0.0);
}

std::uint64_t KeyValues::get_uint(const std::string& key, std::uint64_t fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  std::string_view text = *v;
  int base = 10;
  if (text.starts_with("0x") || text.starts_with("0X")) {
    text.remove_prefix(2);
    base = 16;
  }
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out, base);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) bad_value(key, *v);
  return out;
}

}  // namespace edgemeter
