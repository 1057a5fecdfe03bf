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

// Locale-independent number formatting and the flat key = value config format.

#ifndef BCVAD_TEXT_HPP_
#define BCVAD_TEXT_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bcvad {

// Shortest round-trip representation; "nan"/"inf" for non-finite values.
std::string FormatDouble(double v);
// Fixed notation with the given number of decimals.
std::string FormatFixed(double v, int decimals);

double ParseDouble(std::string_view s);
std::int64_t ParseInt(std::string_view s);
std::uint64_t ParseU64(std::string_view s);
std::string_view Trim(std::string_view s);
std::vector<std::string> SplitList(std::string_view s, char sep = ',');

// 64-bit FNV-1a.
std::uint64_t Fnv1a64(std::string_view data);

// Flat "key = value" text, '#' starts a comment. Later keys override earlier.
class KeyValueConfig {
 public:
  static KeyValueConfig Parse(std::string_view text);
  static KeyValueConfig Load(const std::string& path);

  void Set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool Has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> Get(const std::string& key) const;

  std::string GetString(const std::string& key, const std::string& fallback) const;
  double GetDouble(const std::string& key, double fallback) const;
  std::int64_t GetInt(const std::string& key, std::int64_t fallback) const;
  std::uint64_t GetU64(const std::string& key, std::uint64_t fallback) const;
  bool GetBool(const std::string& key, bool fallback) const;
  std::vector<double> GetDoubleList(const std::string& key,
                                    const std::vector<double>& fallback) const;
  std::vector<std::string> GetStringList(const std::string& key,
                                         const std::vector<std::string>& fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  std::string Serialize() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace bcvad

#endif  // BCVAD_TEXT_HPP_
