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
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

// Command-line front end: `annolex <command> <subcommand> [options]`.
namespace annolex::cli {

/// Runs one command line (args[0] is the program name). Returns 0 on
/// success, 1 on a domain error (one `module.Name: message` line on `err`)
/// and 2 on a usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct PipelineReport {
  std::uint64_t network_calls = 0;
  std::uint64_t cache_hits = 0;
  nlohmann::ordered_json eval;  // contents of eval.json
};

/// corpus -> presample -> annotate -> postsample -> split -> baseline train
/// -> eval -> checklist, all driven by one config file. Relative paths in
/// the config resolve against the config file's directory.
PipelineReport run_pipeline(const std::filesystem::path& config_path,
                            const std::filesystem::path& out_dir,
                            std::optional<std::uint64_t> seed_override,
                            const std::vector<std::string>& argv);

/// Root of the shipped data files: $ANNOLEX_DATA_DIR, else the source tree.
std::filesystem::path data_dir();

}  // namespace annolex::cli
