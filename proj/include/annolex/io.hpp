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

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

// File plumbing shared by every module: whole-file reads, atomic writes,
// RFC 4180 CSV and JSON Lines. All errors surface as Error("io", ...).
namespace annolex::io {

std::string read_file(const std::filesystem::path& path);

/// Writes via a temporary sibling and rename(2), so readers never observe a
/// partially written file. Creates parent directories.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column, or nullopt.
  std::optional<std::size_t> find_column(std::string_view name) const;
  /// Index of a header column; throws Error("io", "MissingColumn").
  std::size_t column(std::string_view name) const;
};

/// Parses CSV text whose first record is the header. Quoted fields may
/// contain separators, doubled quotes and newlines. A trailing newline is
/// optional; blank lines are skipped. Every row must have header.size()
/// fields (Error("io", "MalformedCsv") otherwise).
CsvTable parse_csv(std::string_view content);
CsvTable read_csv(const std::filesystem::path& path);

/// Quotes a field when it contains ',', '"', CR/LF or edge whitespace.
std::string csv_escape(std::string_view field);
std::string csv_line(const std::vector<std::string>& fields);

/// One JSON document per non-blank line.
std::vector<nlohmann::json> parse_jsonl(std::string_view content,
                                        std::string_view source = "<memory>");
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

/// Compact single-line dump; invalid UTF-8 is replaced, never thrown.
std::string dump_line(const nlohmann::ordered_json& j);

template <typename Range>
std::string to_jsonl(const Range& docs) {
  std::string out;
  for (const auto& d : docs) {
    out += dump_line(d);
    out += '\n';
  }
  return out;
}

}  // namespace annolex::io
