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
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "annolex/types.hpp"

// Behavioral stress tests: minimum functionality (MFT), invariance (INV) and
// directional expectation (DIR) suites.
namespace annolex::checklist {

enum class TestType { kMft, kInv, kDir };
std::string_view to_string(TestType t);

enum class Expectation { kPredictEquals, kPredictionUnchanged, kFlipsToBiased };
std::string_view to_string(Expectation e);

inline constexpr std::string_view kMftFactual = "mft-factual";
inline constexpr std::string_view kInvLocations = "inv-locations";
inline constexpr std::string_view kInvPronouns = "inv-pronouns";
inline constexpr std::string_view kInvPrejudice = "inv-prejudice";
inline constexpr std::string_view kDirLoadedWords = "dir-loaded-words";

/// The five suite names, in report order.
const std::vector<std::string>& suite_names();

struct PerturbationCase {
  std::string case_id;
  std::string test_name;
  TestType type = TestType::kMft;
  std::string original;
  std::string perturbed;
  Expectation expectation = Expectation::kPredictEquals;
  std::optional<BiasLabel> expected_label;  // set for kPredictEquals

  friend bool operator==(const PerturbationCase&, const PerturbationCase&) = default;
};

nlohmann::ordered_json to_json(const PerturbationCase& c);
PerturbationCase case_from_json(const nlohmann::json& j);
std::vector<PerturbationCase> read_cases_jsonl(const std::filesystem::path& path);

struct Lexicons {
  std::vector<std::string> locations;
  /// Interchangeable minority terms; every group has at least two members.
  std::vector<std::vector<std::string>> minority_groups;
  std::vector<std::string> loaded_adjectives;
  std::vector<std::string> loaded_adverbs;
};

/// Reads locations.txt, minorities.txt (one group per line, terms separated
/// by '|'), loaded_adjectives.txt and loaded_adverbs.txt. Blank lines and
/// lines starting with '#' are ignored; duplicates are dropped. Throws
/// Error("checklist", "EmptyLexicon") and "MalformedLexicon".
Lexicons load_lexicons(const std::filesystem::path& dir);

/// Plain text sentences, one per line ('#' comments allowed).
std::vector<std::string> read_sentence_lines(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Generation

std::vector<PerturbationCase> gen_mft_factual(const std::vector<std::string>& sentences);

enum class LexiconKind { kLocations, kPronouns, kMinorities };

/// One case per sentence with a match: the first match is replaced with a
/// different term of the same kind, chosen by a generator seeded from
/// (seed, suite, sentence). Sentences without a match are skipped. Person
/// names are found with an honorific + capitalized-word heuristic, runs of
/// two or more capitalized words, and capitalized possessives ("Portman's");
/// they become he/she/they or his/her/their (capitalized at sentence start).
std::vector<PerturbationCase> gen_inv_substitution(const std::vector<std::string>& sentences,
                                                   LexiconKind kind, const Lexicons& lex,
                                                   std::uint64_t seed);

/// Inserts a loaded adverb right after the first auxiliary (has, have, had,
/// is, are, was, were, then modals) or, failing that, right before the first
/// past-tense verb candidate; then a loaded adjective before the first
/// numeral after that point, or else before the word following the first
/// definite or demonstrative determiner. Sentences without both slots are
/// skipped.
std::vector<PerturbationCase> gen_dir_loaded(const std::vector<std::string>& sentences,
                                             const Lexicons& lex, std::uint64_t seed);

/// Dispatches on a suite name. Throws Error("checklist", "UnknownSuite").
std::vector<PerturbationCase> generate_suite(std::string_view suite,
                                             const std::vector<std::string>& sentences,
                                             const Lexicons& lex, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Scoring

struct SuiteScore {
  std::string test_name;
  std::size_t cases_total = 0;
  std::size_t cases_passed = 0;
  double pass_rate = 0.0;  // 0 when no case is retained
};

struct ChecklistReport {
  std::vector<SuiteScore> suites;  // first appearance order

  std::string to_text() const;
  /// {"suites": [{test_name, cases_total, cases_passed, pass_rate}, ...]}
  nlohmann::ordered_json to_json() const;
};

using Predictor = std::function<BiasLabel(const std::string&)>;

/// MFT passes iff predict(original) equals the expected label; INV iff the
/// prediction is unchanged; DIR cases are kept only when predict(original)
/// is NotBiased and pass iff predict(perturbed) is Biased.
ChecklistReport score_suite(const std::vector<PerturbationCase>& cases, const Predictor& predict);

/// Predictions keyed by (case_id, variant) with variant "original" or
/// "perturbed", read from CSV `case_id,variant,label`.
using CasePredictions = std::map<std::pair<std::string, std::string>, BiasLabel>;
CasePredictions read_case_predictions(const std::filesystem::path& path);

/// Throws Error("checklist", "MissingPrediction").
ChecklistReport score_with_predictions(const std::vector<PerturbationCase>& cases,
                                       const CasePredictions& preds);

}  // namespace annolex::checklist
