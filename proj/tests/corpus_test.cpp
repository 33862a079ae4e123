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


#include <gtest/gtest.h>

#include <cmath>

#include "annolex/corpus.hpp"
#include "annolex/error.hpp"
#include "annolex/hash.hpp"
#include "annolex/io.hpp"
#include "test_support.hpp"

namespace annolex::corpus {
namespace {

using L = PoliticalLeaning;

TEST(Ratings, AllsidesSpellings) {
  EXPECT_EQ(map_allsides("Lean Left"), L::kLeanLeft);
  EXPECT_EQ(map_allsides("lean-right"), L::kLeanRight);
  EXPECT_EQ(map_allsides("CENTER"), L::kCenter);
  EXPECT_FALSE(map_allsides("Mixed").has_value());
}

TEST(Ratings, AdfontesBands) {
  EXPECT_EQ(map_adfontes(-18.0), L::kLeft);
  EXPECT_EQ(map_adfontes(-17.9), L::kLeanLeft);
  EXPECT_EQ(map_adfontes(-6.0), L::kLeanLeft);
  EXPECT_EQ(map_adfontes(-5.9), L::kCenter);
  EXPECT_EQ(map_adfontes(5.9), L::kCenter);
  EXPECT_EQ(map_adfontes(6.0), L::kLeanRight);
  EXPECT_EQ(map_adfontes(18.0), L::kRight);
}

TEST(Ratings, UnifyRequiresAgreement) {
  EXPECT_EQ(unify_ratings("Left", -25.0), L::kLeft);
  EXPECT_FALSE(unify_ratings("Left", 0.0).has_value());
  EXPECT_FALSE(unify_ratings("Center", std::nan("")).has_value());
}

TEST(SplitSentences, AbbreviationsAndInitials) {
  const auto s = split_sentences(
      "Dr. Smith met officials in the U.S. capital on Monday. They talked for hours! "
      "Was it worth it? J. R. Doe said so. (It was. Really.) and more");
  ASSERT_EQ(s.size(), 5u);
  EXPECT_EQ(s[0], "Dr. Smith met officials in the U.S. capital on Monday.");
  EXPECT_EQ(s[1], "They talked for hours!");
  EXPECT_EQ(s[2], "Was it worth it?");
  EXPECT_EQ(s[3], "J. R. Doe said so.");
  EXPECT_EQ(s[4], "(It was. Really.) and more");
}

TEST(SplitSentences, ClosingQuotesAndEllipsis) {
  const auto s = split_sentences("He said \"stop.\" Then he left… Nobody followed.");
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0], "He said \"stop.\"");
  EXPECT_EQ(s[1], "Then he left…");
}

TEST(SplitSentences, JoinReproducesCollapsedInput) {
  const std::string body = "One   two three.  Four five?\nSix seven eight!";
  std::string joined;
  for (const auto& p : split_sentences(body)) joined += (joined.empty() ? "" : " ") + p;
  EXPECT_EQ(joined, "One two three. Four five? Six seven eight!");
}

TEST(CleanSentence, JunkAndLength) {
  EXPECT_EQ(clean_sentence("ADVERTISEMENT The council met on Monday evening."),
            "The council met on Monday evening.");
  EXPECT_EQ(clean_sentence("• The council met on Monday evening."),
            "The council met on Monday evening.");
  EXPECT_FALSE(clean_sentence("Too short here.").has_value());
  CleanConfig tight;
  tight.max_tokens = 6;
  EXPECT_FALSE(clean_sentence("One two three four five six seven.", tight).has_value());
}

TEST(Filter, LanguageLengthPrintable) {
  ArticleRecord a;
  a.body = std::string(250, 'x');
  EXPECT_FALSE(filter_article(a));  // no English stopwords
  a.body = "The council met on Monday and the mayor said that the plan is on track. ";
  a.body += a.body + a.body + a.body;
  EXPECT_TRUE(filter_article(a));
  a.detected_language = "de";
  EXPECT_FALSE(filter_article(a));
  ArticleRecord short_article;
  short_article.body = "The plan is on track.";
  EXPECT_FALSE(filter_article(short_article));
  EXPECT_LT(printable_ratio("ab\x01\x02"), 0.95);
}

TEST(SentenceId, IsContentDerived) {
  EXPECT_EQ(sentence_id("art", 3), content_id({"art", "3"}));
}

ArticleRecord article(const std::string& id, const std::string& allsides, double bias) {
  ArticleRecord a;
  a.article_id = id;
  a.outlet = "outlet " + id;
  a.url = "https://x/" + id;
  a.allsides_rating = allsides;
  a.adfontes_bias = bias;
  a.body =
      "The mayor said on Monday that the new bridge will open in the spring. "
      "Read more: the council has not yet approved all of the funds. "
      "Short one. "
      "Officials expect that the work will be finished before the end of the year.";
  return a;
}

TEST(BuildCorpus, PipelineAndStats) {
  CorpusStats stats;
  const auto out = build_corpus({article("b", "Right", 25.0), article("a", "Left", -25.0),
                                 article("c", "Left", 25.0)},
                                CorpusConfig{}, &stats);
  EXPECT_EQ(stats.articles, 3u);
  EXPECT_EQ(stats.rating_disagreements, 1u);
  EXPECT_EQ(stats.segments, 8u);
  EXPECT_EQ(stats.dropped_by_cleaning, 2u);
  ASSERT_EQ(out.size(), 6u);
  EXPECT_EQ(out[0].article_id, "a");
  EXPECT_EQ(out[0].leaning, L::kLeft);
  EXPECT_EQ(out[1].text, "the council has not yet approved all of the funds.");
  EXPECT_EQ(out[1].sentence_id, sentence_id("a", 1));
  EXPECT_EQ(out[2].sentence_id, sentence_id("a", 3));
  EXPECT_EQ(out[3].leaning, L::kRight);
}

TEST(BuildCorpus, JsonlRoundTrip) {
  testing::TempDir dir;
  const auto out = build_corpus({article("a", "Center", 0.0)}, CorpusConfig{});
  io::write_file_atomic(dir / "s.jsonl", sentences_to_jsonl(out));
  EXPECT_EQ(read_sentences(dir / "s.jsonl"), out);
}

TEST(ReadArticles, DuplicateIdsRejected) {
  testing::TempDir dir;
  const std::string row =
      R"({"article_id":"x","outlet":"o","url":"u","body":"b","allsides_rating":"Left","adfontes_bias":-20})";
  io::write_file_atomic(dir / "a.jsonl", row + "\n" + row + "\n");
  EXPECT_THROW(read_articles(dir / "a.jsonl"), Error);
  io::write_file_atomic(dir / "b.jsonl", R"({"article_id":"x"})" "\n");
  EXPECT_THROW(read_articles(dir / "b.jsonl"), Error);
}

TEST(CorpusConfig, ReadsSection) {
  const auto cfg = CorpusConfig::from_config(
      Config::parse("[corpus]\nmin_tokens = 3\nadfontes_lean_threshold = 5\n"));
  EXPECT_EQ(cfg.clean.min_tokens, 3u);
  EXPECT_DOUBLE_EQ(cfg.thresholds.lean, 5.0);
}

}  // namespace
}  // namespace annolex::corpus
