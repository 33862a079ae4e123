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

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "annolex/error.hpp"
#include "annolex/rng.hpp"
#include "annolex/types.hpp"
#include "json.hpp"

// Balance-driven sampling: the weak-label pre-sample, the post-annotation
// 1:1 rebalance, stratified splits and the k-center coreset.
//
// Every operation is a pure function of (input, seed). Inputs are sorted by
// sentence_id before any random draw, so input order never matters.
namespace annolex::sampling {

struct WeakLabeledSentence {
  SentenceRecord sentence;
  BiasLabel weak_label = BiasLabel::kNotBiased;
  double weak_score = 0.0;
};

/// weak_label = Biased iff score >= 0.5. Throws Error("sampling",
/// "InvalidWeakScore") outside [0, 1].
WeakLabeledSentence make_weak(SentenceRecord s, double score);

/// Attaches scores from weak-label JSONL rows ({"sentence_id", "weak_score"}).
/// Rows for unknown ids are ignored; a sentence without a score raises
/// Error("sampling", "MissingWeakLabel").
std::vector<WeakLabeledSentence> join_weak_labels(
    const std::vector<SentenceRecord>& sentences,
    const std::vector<nlohmann::json>& weak_rows);

/// Cell index in [0, 10): leaning * 2 + label.
inline std::size_t cell_index(PoliticalLeaning l, BiasLabel b) {
  return static_cast<std::size_t>(l) * 2 + static_cast<std::size_t>(b);
}

/// Draws exactly `quota` items from each of the 10 (leaning x weak label)
/// cells by seeded sampling without replacement. Without a quota the
/// smallest cell size is used. Output is sorted by sentence_id.
/// Throws Error("sampling", "CellUnderflow") when a cell is too small.
std::vector<WeakLabeledSentence> presample_balanced(
    const std::vector<WeakLabeledSentence>& pool, std::optional<std::size_t> quota,
    std::uint64_t seed);

/// Within every leaning keeps min(|Biased|, |NotBiased|) of each label,
/// subsampling the majority side. Output sorted by sentence_id.
std::vector<LabeledSentence> postsample_balanced(const std::vector<LabeledSentence>& annotated,
                                                 std::uint64_t seed);

enum class Split : std::uint8_t { kTrain = 0, kDev = 1, kTest = 2 };
std::string_view to_string(Split s);
std::optional<Split> parse_split(std::string_view s);

struct SplitRatios {
  double train = 0.7;
  double dev = 0.15;
  double test = 0.15;
};

/// "0.7,0.15,0.15". Throws Error("sampling", "InvalidRatios").
SplitRatios parse_ratios(std::string_view s);

/// Largest-remainder allocation of n items. Remainder ties go to the earlier
/// split (train, then dev, then test).
std::array<std::size_t, 3> largest_remainder(std::size_t n, const SplitRatios& r);

struct DatasetItem {
  LabeledSentence item;
  Split split = Split::kTrain;
};

struct LabeledDataset {
  std::vector<DatasetItem> items;

  std::vector<LabeledSentence> subset(Split s) const;
};

/// Stratified by (leaning x label); each stratum is shuffled with its own
/// seeded stream and cut by largest_remainder. Output sorted by sentence_id.
/// Throws Error("sampling", "EmptyDataset") / ("sampling", "InvalidRatios") /
/// ("sampling", "DuplicateSentenceId").
LabeledDataset split_dataset(const std::vector<LabeledSentence>& items,
                             const SplitRatios& ratios, std::uint64_t seed);

/// Header `sentence_id,text,leaning,label,split`.
std::string dataset_to_csv(const LabeledDataset& ds);
std::string dataset_to_csv(const LabeledDataset& ds, Split only);
std::string dataset_to_jsonl(const LabeledDataset& ds);
LabeledDataset read_dataset_csv(const std::filesystem::path& path);

nlohmann::ordered_json to_json(const LabeledSentence& s);
LabeledSentence labeled_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const WeakLabeledSentence& s);
WeakLabeledSentence weak_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Coreset

/// Farthest-point-first selection of m of n points starting from `first`.
/// Each step picks the point maximizing its distance to the nearest chosen
/// center; ties go to the lowest index. Returns indices in selection order.
/// `dist(i, j)` must be a metric on point indices.
template <typename Distance>
std::vector<std::size_t> k_center_greedy(std::size_t n, std::size_t m, std::size_t first,
                                         Distance&& dist) {
  if (m > n) {
    throw Error("sampling", "SizeExceedsDataset",
                "coreset size " + std::to_string(m) + " exceeds dataset size " +
                    std::to_string(n));
  }
  std::vector<std::size_t> selected;
  if (m == 0) return selected;
  if (first >= n) {
    throw Error("sampling", "InvalidArgument", "first center out of range");
  }
  selected.reserve(m);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::vector<char> chosen(n, 0);
  std::size_t next = first;
  while (true) {
    chosen[next] = 1;
    selected.push_back(next);
    if (selected.size() == m) break;
    for (std::size_t i = 0; i < n; ++i) {
      if (!chosen[i]) nearest[i] = std::min(nearest[i], static_cast<double>(dist(next, i)));
    }
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!chosen[i] && nearest[i] > best) {
        best = nearest[i];
        next = i;
      }
    }
  }
  return selected;
}

/// Max over points of the distance to the nearest center.
template <typename Distance>
double covering_radius(std::size_t n, const std::vector<std::size_t>& centers,
                       Distance&& dist) {
  double radius = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t c : centers) nearest = std::min(nearest, static_cast<double>(dist(c, i)));
    radius = std::max(radius, nearest);
  }
  return centers.empty() ? std::numeric_limits<double>::infinity() : radius;
}

/// k-center greedy with a seeded uniform first center.
template <typename Distance>
std::vector<std::size_t> coreset_select(std::size_t n, std::size_t m, std::uint64_t seed,
                                        Distance&& dist) {
  if (m > n) return k_center_greedy(n, m, 0, dist);  // throws
  if (m == 0) return {};
  Rng rng(seed);
  return k_center_greedy(n, m, static_cast<std::size_t>(rng.uniform_index(n)), dist);
}

/// Euclidean k-center over dense feature rows. Throws
/// Error("sampling", "DimensionMismatch") on ragged input.
std::vector<std::size_t> coreset_select(const std::vector<std::vector<double>>& features,
                                        std::size_t m, std::uint64_t seed);

}  // namespace annolex::sampling
