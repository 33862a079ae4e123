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

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

namespace annolex {

/// Five-point outlet leaning. The underlying values give the total order
/// Left < LeanLeft < Center < LeanRight < Right.
enum class PoliticalLeaning : std::uint8_t {
  kLeft = 0,
  kLeanLeft = 1,
  kCenter = 2,
  kLeanRight = 3,
  kRight = 4,
};

inline constexpr std::array<PoliticalLeaning, 5> kAllLeanings = {
    PoliticalLeaning::kLeft, PoliticalLeaning::kLeanLeft,
    PoliticalLeaning::kCenter, PoliticalLeaning::kLeanRight,
    PoliticalLeaning::kRight};

std::string_view to_string(PoliticalLeaning leaning);
/// Accepts the names produced by to_string(); case-sensitive.
std::optional<PoliticalLeaning> parse_leaning(std::string_view s);
/// Left<->Right, LeanLeft<->LeanRight, Center fixed.
PoliticalLeaning mirror(PoliticalLeaning leaning);

/// Binary lexical-bias label. Biased is the positive class.
enum class BiasLabel : std::uint8_t { kNotBiased = 0, kBiased = 1 };

/// "BIASED" / "NOT BIASED"
std::string_view to_string(BiasLabel label);
/// Accepts "BIASED"/"NOT BIASED" (any case), "1"/"0", "true"/"false".
std::optional<BiasLabel> parse_bias_label(std::string_view s);

inline BiasLabel invert(BiasLabel label) {
  return label == BiasLabel::kBiased ? BiasLabel::kNotBiased : BiasLabel::kBiased;
}

/// A cleaned news sentence with provenance.
struct SentenceRecord {
  std::string sentence_id;
  std::string text;
  PoliticalLeaning leaning = PoliticalLeaning::kCenter;
  std::string outlet;
  std::string article_id;

  friend bool operator==(const SentenceRecord&, const SentenceRecord&) = default;
};

nlohmann::ordered_json to_json(const SentenceRecord& s);
/// Throws annolex::Error("corpus", "MalformedRecord") on missing keys.
SentenceRecord sentence_from_json(const nlohmann::json& j);

/// A sentence with its (synthetic or gold) bias label.
struct LabeledSentence {
  SentenceRecord sentence;
  BiasLabel label = BiasLabel::kNotBiased;

  friend bool operator==(const LabeledSentence&, const LabeledSentence&) = default;
};

}  // namespace annolex
