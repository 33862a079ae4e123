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
#include <utility>
#include <vector>

#include "json.hpp"

#include "annolex/types.hpp"

// Classification metrics, paired significance tests and the annotator
// benchmark matrix.
namespace annolex::metrics {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Biased is the positive class. Throws Error("metrics", "LengthMismatch")
/// and Error("metrics", "Empty").
ConfusionCounts confusion(const std::vector<BiasLabel>& preds, const std::vector<BiasLabel>& golds);

/// Matthews correlation; 0 when any marginal is empty.
double mcc(const ConfusionCounts& c);

struct Prf1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Each ratio is 0 when its denominator is 0.
Prf1 prf1(const ConfusionCounts& c);
double accuracy(const ConfusionCounts& c);

enum class McNemarMethod { kExactBinomial, kChiSquareCC };
std::string_view to_string(McNemarMethod m);

struct McNemarResult {
  std::uint64_t b = 0;  // A right, B wrong
  std::uint64_t c = 0;  // A wrong, B right
  /// Chi-square branch: (|b-c|-1)^2/(b+c). Exact branch: the uncorrected
  /// (b-c)^2/(b+c), reported for reference only.
  double statistic = 0.0;
  double p_value = 1.0;
  McNemarMethod method = McNemarMethod::kExactBinomial;
};

/// Below this many discordant pairs the exact binomial test is used.
inline constexpr std::uint64_t kExactThreshold = 25;

/// Throws Error("metrics", "NoDisagreements") when b + c == 0.
McNemarResult mcnemar_from_counts(std::uint64_t b, std::uint64_t c);
/// Throws Error("metrics", "LengthMismatch") and "NoDisagreements".
McNemarResult mcnemar(const std::vector<BiasLabel>& preds_a, const std::vector<BiasLabel>& preds_b,
                      const std::vector<BiasLabel>& golds);

/// Upper tail of the chi-square distribution with one degree of freedom.
double chi_square1_upper_tail(double x);

// ---------------------------------------------------------------------------
// Benchmark matrix

struct BenchmarkRun {
  std::string model;
  std::string settings;
  std::vector<BiasLabel> preds;
};

struct BenchmarkCell {
  std::string model;
  std::string settings;
  std::optional<double> mcc;  // nullopt renders as an undefined cell
};

struct BenchmarkRow {
  std::string model;
  std::vector<std::optional<double>> cells;  // aligned with BenchmarkMatrix::columns
  std::optional<double> mean;                // over defined cells
};

struct BenchmarkMatrix {
  std::vector<std::string> columns;
  std::vector<BenchmarkRow> rows;  // descending mean, then model name

  std::string to_csv() const;
  std::string to_text() const;
  nlohmann::ordered_json to_json() const;
};

/// Columns follow `column_order` when given, then first appearance. Throws
/// Error("metrics", "DuplicateRun").
BenchmarkMatrix benchmark_from_cells(const std::vector<BenchmarkCell>& cells,
                                     const std::vector<std::string>& column_order = {});
/// Throws Error("metrics", "LengthMismatch") for runs not aligned with golds.
BenchmarkMatrix benchmark_matrix(const std::vector<BenchmarkRun>& runs,
                                 const std::vector<BiasLabel>& golds,
                                 const std::vector<std::string>& column_order = {});

// ---------------------------------------------------------------------------
// Prediction files

/// CSV with at least `sentence_id,label` columns, in file order. Throws
/// Error("metrics", "DuplicateId") and "MalformedLabel".
std::vector<std::pair<std::string, BiasLabel>> read_labels_csv(
    const std::filesystem::path& path, std::optional<std::string> split = std::nullopt);

std::string labels_to_csv(const std::vector<std::pair<std::string, BiasLabel>>& labels);

/// Reorders `preds` to follow the ids of `golds`. Throws
/// Error("metrics", "MissingPrediction").
std::vector<BiasLabel> align_to(const std::vector<std::pair<std::string, BiasLabel>>& preds,
                                const std::vector<std::pair<std::string, BiasLabel>>& golds);

std::string format_fixed(double v, int decimals = 3);

}  // namespace annolex::metrics
