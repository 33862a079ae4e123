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
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "annolex/config.hpp"
#include "annolex/types.hpp"
#include "json.hpp"

// Corpus construction: unify outlet ratings, filter articles, split them into
// sentences and clean each sentence.
namespace annolex::corpus {

/// One pre-scraped article with the ratings of its outlet.
struct ArticleRecord {
  std::string article_id;
  std::string outlet;
  std::string url;
  std::string body;
  std::string allsides_rating;
  double adfontes_bias = 0.0;
  std::optional<std::string> detected_language;
};

ArticleRecord article_from_json(const nlohmann::json& j);

/// Reads one articles JSONL file. Throws Error("corpus", "DuplicateArticleId")
/// if an article_id repeats within the file.
std::vector<ArticleRecord> read_articles(const std::filesystem::path& file);

/// Every *.jsonl under `dir` (non-recursive), files in name order.
std::vector<ArticleRecord> read_article_dir(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Ratings

/// Cut points on the signed bias score. With the defaults:
///   b <= -18 Left, (-18,-6] LeanLeft, (-6,6) Center, [6,18) LeanRight, >= 18 Right.
struct RatingThresholds {
  double lean = 6.0;
  double far = 18.0;
};

/// Case-insensitive; spaces, hyphens and underscores are ignored, so
/// "Lean Left", "lean-left" and "LEANLEFT" all map to LeanLeft.
std::optional<PoliticalLeaning> map_allsides(std::string_view raw);
PoliticalLeaning map_adfontes(double bias, const RatingThresholds& t = {});

/// The shared leaning when both platforms agree exactly, absent otherwise
/// (including unrecognized categories and non-finite scores).
std::optional<PoliticalLeaning> unify_ratings(std::string_view allsides_raw,
                                              double adfontes_bias,
                                              const RatingThresholds& t = {});

// ---------------------------------------------------------------------------
// Filtering

/// Pluggable language identification; returns an ISO-639-1 tag or "und".
class LanguageDetector {
 public:
  virtual ~LanguageDetector() = default;
  virtual std::string detect(std::string_view text) const = 0;
};

/// English iff the fraction of word tokens found in a bundled English
/// stopword list reaches `threshold`.
class StopwordLanguageDetector final : public LanguageDetector {
 public:
  explicit StopwordLanguageDetector(double threshold = 0.12) : threshold_(threshold) {}

  std::string detect(std::string_view text) const override;
  static double stopword_ratio(std::string_view text);
  double threshold() const { return threshold_; }

 private:
  double threshold_;
};

struct FilterConfig {
  std::size_t min_article_chars = 200;
  double min_printable_ratio = 0.95;
};

/// Fraction of decoded code points that are neither control characters
/// (tab/CR/LF excepted) nor invalid UTF-8. Empty text scores 0.
double printable_ratio(std::string_view text);

/// Uses the article's detected_language when present, `detector` otherwise.
bool filter_article(const ArticleRecord& a, const FilterConfig& cfg,
                    const LanguageDetector& detector);
bool filter_article(const ArticleRecord& a, const FilterConfig& cfg = {});

// ---------------------------------------------------------------------------
// Segmentation

/// Lowercase abbreviations (with their final period) that never end a
/// sentence: "dr.", "u.s.", ...
const std::set<std::string, std::less<>>& default_abbreviations();

/// Rule-based splitter over whitespace-collapsed text.
///
/// A boundary is a run of '.', '!', '?' or U+2026, optionally followed by
/// closing quotes/brackets, then whitespace or end of text. It is rejected
/// when: the run is a single '.' closing a listed abbreviation or a
/// single-letter initial; the boundary sits inside an open parenthesis or
/// bracket; or the next word starts with a lowercase letter.
/// Text without any boundary yields one segment. Segments are trimmed and
/// joining them with single spaces reproduces the collapsed input.
std::vector<std::string> split_sentences(std::string_view text);

/// Splits the collapsed body into SentenceRecords with ordinals 0..n-1 and
/// ids content_id(article_id, ordinal). Texts are not cleaned here.
std::vector<SentenceRecord> segment_sentences(const ArticleRecord& a,
                                              PoliticalLeaning leaning);

/// Stable id of a sentence within its article.
std::string sentence_id(std::string_view article_id, std::size_t ordinal);

// ---------------------------------------------------------------------------
// Cleaning

struct CleanConfig {
  std::size_t min_tokens = 5;
  std::size_t max_tokens = 150;
  std::vector<std::string> junk_prefixes = {"ADVERTISEMENT", "Advertisement",
                                            "READ MORE:", "Read more:",
                                            "Related:", "WATCH:", "Watch:"};
  std::vector<std::string> junk_suffixes = {"ADVERTISEMENT", "Advertisement",
                                            "Read more", "Continue reading"};
};

/// Removes control and zero-width characters, maps Unicode spaces to ' ',
/// collapses whitespace, strips bullet/rule symbols and configured junk at
/// both ends. Absent when the result has fewer than min_tokens or more than
/// max_tokens whitespace-delimited tokens.
std::optional<std::string> clean_sentence(std::string_view text,
                                          const CleanConfig& cfg = {});

// ---------------------------------------------------------------------------
// Pipeline

struct CorpusConfig {
  RatingThresholds thresholds;
  FilterConfig filter;
  CleanConfig clean;
  std::shared_ptr<const LanguageDetector> detector =
      std::make_shared<StopwordLanguageDetector>();

  /// Reads the [corpus] section; absent keys keep their defaults.
  static CorpusConfig from_config(const Config& cfg);
};

struct CorpusStats {
  std::size_t articles = 0;
  std::size_t rating_disagreements = 0;
  std::size_t filtered_out = 0;
  std::size_t segments = 0;
  std::size_t dropped_by_cleaning = 0;
  std::size_t sentences = 0;
};

/// unify -> filter -> segment -> clean. Output sorted by (article_id, ordinal)
/// regardless of input order.
std::vector<SentenceRecord> build_corpus(const std::vector<ArticleRecord>& articles,
                                         const CorpusConfig& cfg,
                                         CorpusStats* stats = nullptr);

std::vector<SentenceRecord> read_sentences(const std::filesystem::path& file);
std::string sentences_to_jsonl(const std::vector<SentenceRecord>& sentences);

}  // namespace annolex::corpus
