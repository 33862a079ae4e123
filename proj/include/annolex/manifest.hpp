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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace annolex {

/// Reproducibility record written next to a job's outputs.
class RunManifest {
 public:
  explicit RunManifest(std::vector<std::string> argv);

  void set_config(nlohmann::ordered_json snapshot) { config_ = std::move(snapshot); }
  void add_seed(const std::string& module, std::uint64_t seed);
  /// Records the SHA-256 of a file, or of every file below a directory.
  void add_input(const std::filesystem::path& path);
  void add_timing(const std::string& stage, std::chrono::steady_clock::duration d);
  void add_stat(const std::string& key, nlohmann::ordered_json value);

  /// Digests every file under `out_dir` except the manifest itself and
  /// writes `out_dir/manifest.json` atomically.
  void write(const std::filesystem::path& out_dir);

  nlohmann::ordered_json to_json() const { return doc_(); }

 private:
  nlohmann::ordered_json doc_() const;

  std::vector<std::string> argv_;
  nlohmann::ordered_json config_ = nlohmann::ordered_json::object();
  nlohmann::ordered_json seeds_ = nlohmann::ordered_json::object();
  nlohmann::ordered_json inputs_ = nlohmann::ordered_json::object();
  nlohmann::ordered_json outputs_ = nlohmann::ordered_json::object();
  nlohmann::ordered_json timings_ = nlohmann::ordered_json::object();
  nlohmann::ordered_json stats_ = nlohmann::ordered_json::object();
};

/// Sorted (relative path, SHA-256) pairs for the regular files under `dir`.
std::vector<std::pair<std::string, std::string>> digest_tree(const std::filesystem::path& dir);

}  // namespace annolex
