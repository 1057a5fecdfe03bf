/* Copyright 2026 The bcvad Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "bcvad/text.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bcvad/error.hpp"

namespace bcvad {

std::string FormatDouble(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string FormatFixed(double v, int decimals) {
  if (!std::isfinite(v)) return FormatDouble(v);
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, decimals);
  return std::string(buf, res.ptr);
}

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double ParseDouble(std::string_view s) {
  s = Trim(s);
  if (s == "nan" || s == "NA") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  Require(res.ec == std::errc() && res.ptr == s.data() + s.size(), ErrorCode::kConfig,
          "not a number: '" + std::string(s) + "'");
  return v;
}

std::int64_t ParseInt(std::string_view s) {
  s = Trim(s);
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  Require(res.ec == std::errc() && res.ptr == s.data() + s.size(), ErrorCode::kConfig,
          "not an integer: '" + std::string(s) + "'");
  return v;
}

std::uint64_t ParseU64(std::string_view s) {
  s = Trim(s);
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  Require(res.ec == std::errc() && res.ptr == s.data() + s.size(), ErrorCode::kConfig,
          "not an unsigned integer: '" + std::string(s) + "'");
  return v;
}

std::uint64_t Fnv1a64(std::string_view data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<std::string> SplitList(std::string_view s, char sep) {
  std::vector<std::string> out;
  while (true) {
    const auto pos = s.find(sep);
    const auto item = Trim(s.substr(0, pos));
    if (!item.empty()) out.emplace_back(item);
    if (pos == std::string_view::npos) break;
    s.remove_prefix(pos + 1);
  }
  return out;
}

KeyValueConfig KeyValueConfig::Parse(std::string_view text) {
  KeyValueConfig cfg;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    Require(eq != std::string_view::npos, ErrorCode::kConfig,
            "config line " + std::to_string(line_no) + ": expected key = value");
    const auto key = Trim(line.substr(0, eq));
    Require(!key.empty(), ErrorCode::kConfig,
            "config line " + std::to_string(line_no) + ": empty key");
    cfg.Set(std::string(key), std::string(Trim(line.substr(eq + 1))));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::Load(const std::string& path) {
  std::ifstream in(path);
  Require(in.good(), ErrorCode::kIo, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return Parse(ss.str());
}

std::optional<std::string> KeyValueConfig::Get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueConfig::GetString(const std::string& key,
                                      const std::string& fallback) const {
  return Get(key).value_or(fallback);
}

double KeyValueConfig::GetDouble(const std::string& key, double fallback) const {
  const auto v = Get(key);
  return v ? ParseDouble(*v) : fallback;
}

std::int64_t KeyValueConfig::GetInt(const std::string& key, std::int64_t fallback) const {
  const auto v = Get(key);
  return v ? ParseInt(*v) : fallback;
}

std::uint64_t KeyValueConfig::GetU64(const std::string& key, std::uint64_t fallback) const {
  const auto v = Get(key);
  return v ? ParseU64(*v) : fallback;
}

bool KeyValueConfig::GetBool(const std::string& key, bool fallback) const {
  const auto v = Get(key);
  if (!v) return fallback;
  if (*v == "1" || *v == "true" || *v == "yes" || *v == "on") return true;
  if (*v == "0" || *v == "false" || *v == "no" || *v == "off") return false;
  Fail(ErrorCode::kConfig, "not a boolean for '" + key + "': '" + *v + "'");
}

std::vector<double> KeyValueConfig::GetDoubleList(const std::string& key,
                                                  const std::vector<double>& fallback) const {
  const auto v = Get(key);
  if (!v) return fallback;
  std::vector<double> out;
  for (const auto& item : SplitList(*v)) out.push_back(ParseDouble(item));
  return out;
}

std::vector<std::string> KeyValueConfig::GetStringList(
    const std::string& key, const std::vector<std::string>& fallback) const {
  const auto v = Get(key);
  return v ? SplitList(*v) : fallback;
}

std::string KeyValueConfig::Serialize() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

}  // namespace bcvad
