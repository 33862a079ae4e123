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


#include "annolex/manifest.hpp"

#include <algorithm>

#include "annolex/hash.hpp"
#include "annolex/io.hpp"

namespace annolex {

namespace fs = std::filesystem;

std::vector<std::pair<std::string, std::string>> digest_tree(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    out.emplace_back(fs::relative(entry.path(), dir).generic_string(), sha256_file(entry.path()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

RunManifest::RunManifest(std::vector<std::string> argv) : argv_(std::move(argv)) {}

void RunManifest::add_seed(const std::string& module, std::uint64_t seed) { seeds_[module] = seed; }

void RunManifest::add_input(const fs::path& path) {
  if (fs::is_directory(path)) {
    for (const auto& [rel, digest] : digest_tree(path)) {
      inputs_[(path / rel).generic_string()] = digest;
    }
  } else {
    inputs_[path.generic_string()] = sha256_file(path);
  }
}

void RunManifest::add_timing(const std::string& stage, std::chrono::steady_clock::duration d) {
  timings_[stage] = std::chrono::duration<double, std::milli>(d).count();
}

void RunManifest::add_stat(const std::string& key, nlohmann::ordered_json value) {
  stats_[key] = std::move(value);
}

nlohmann::ordered_json RunManifest::doc_() const {
  nlohmann::ordered_json j;
  j["tool"] = "annolex";
  j["version"] = ANNOLEX_VERSION;
  j["command_line"] = argv_;
  j["config"] = config_;
  j["seeds"] = seeds_;
  j["inputs"] = inputs_;
  j["outputs"] = outputs_;
  j["timings_ms"] = timings_;
  j["stats"] = stats_;
  return j;
}

void RunManifest::write(const fs::path& out_dir) {
  outputs_ = nlohmann::ordered_json::object();
  for (const auto& [rel, digest] : digest_tree(out_dir)) {
    if (rel == "manifest.json") continue;
    outputs_[rel] = digest;
  }
  io::write_file_atomic(out_dir / "manifest.json", doc_().dump(2) + "\n");
}

}  // namespace annolex
