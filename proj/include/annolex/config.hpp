// Copyright 2026 The annolex Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
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
#include <vector>

#include "json.hpp"

namespace annolex {

/// Flat INI-style configuration:
///
///     # comment
///     seed = 7
///     [corpus]
///     min_tokens = 5
///     [model.zephyr]
///     base_url = http://127.0.0.1:8080/v1
///
/// Keys before the first section live in the root section "". Values are
/// trimmed strings; typed getters convert on access and throw
/// Error("config", "BadValue") on malformed input.
class Config {
 public:
  Config() = default;

  static Config load(const std::filesystem::path& path);
  static Config parse(std::string_view content);

  bool has(std::string_view section, std::string_view key) const;
  std::optional<std::string> get(std::string_view section, std::string_view key) const;
  std::string get_or(std::string_view section, std::string_view key,
                     std::string_view fallback) const;
  std::string require(std::string_view section, std::string_view key) const;
  std::int64_t get_int(std::string_view section, std::string_view key,
                       std::int64_t fallback) const;
  double get_double(std::string_view section, std::string_view key, double fallback) const;
  bool get_bool(std::string_view section, std::string_view key, bool fallback) const;

  void set(std::string_view section, std::string_view key, std::string value);

  /// Section names starting with `prefix`, in file order.
  std::vector<std::string> sections_with_prefix(std::string_view prefix) const;
  const std::map<std::string, std::string>* section(std::string_view name) const;

  /// {"section": {"key": "value"}} for run manifests.
  nlohmann::ordered_json snapshot() const;

 private:
  std::vector<std::string> order_;
  std::map<std::string, std::map<std::string, std::string>, std::less<>> sections_;
};

}  // namespace annolex
