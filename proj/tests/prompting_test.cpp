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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "annolex/error.hpp"
#include "annolex/io.hpp"
#include "annolex/prompting.hpp"
#include "annolex/rng.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace annolex::prompting {
namespace {

constexpr std::string_view kGoldenTarget =
    "The EU has secured up to 400 million doses of AstraZeneca 's experimental vaccine.";

std::vector<PromptExample> shipped_pool() {
  return read_pool_csv(cli::data_dir() / "pools" / "synthetic_pool.csv");
}

std::size_t count(std::string_view hay, std::string_view needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string_view::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

TEST(Settings, NamesAndOrder) {
  std::vector<std::string> names;
  for (const auto& s : benchmark_settings()) names.push_back(s.name());
  EXPECT_EQ(names, (std::vector<std::string>{"0-shot", "0-shot-sys", "0-shot-exp", "2-shot",
                                             "4-shot", "8-shot", "2-shot-exp", "4-shot-exp",
                                             "8-shot-exp"}));
  for (const auto& s : benchmark_settings()) EXPECT_EQ(parse_settings(s.name()), s);
  EXPECT_EQ(parse_settings("2-shot-sys-exp").name(), "2-shot-sys-exp");
  EXPECT_THROW(parse_settings("3-shot"), Error);
  EXPECT_THROW(parse_settings("8-shot-exp-sys"), Error);
}

TEST(Render, GoldenFilesForAllNineSettings) {
  const auto pool = shipped_pool();
  ASSERT_EQ(pool.size(), 12u);
  for (const auto& s : benchmark_settings()) {
    const std::span<const PromptExample> ex(pool.data(), static_cast<std::size_t>(s.shots));
    const auto p = render_prompt(kGoldenTarget, ex, s);
    const auto golden = io::read_file(testing::golden_dir() / "prompts" / (s.name() + ".txt"));
    EXPECT_EQ(p.text, golden) << s.name();
    EXPECT_EQ(count(p.text, kClassifyLine), static_cast<std::size_t>(s.shots) + 1) << s.name();
  }
}

TEST(Render, ShotMismatchAndMessages) {
  const auto pool = shipped_pool();
  PromptSettings two{2, false, true};
  EXPECT_THROW(render_prompt("x", std::span(pool.data(), 1), two), Error);
  const auto p = render_prompt("A target sentence.", std::span(pool.data(), 2), two);
  EXPECT_EQ(p.system_message(), kSystemPreamble);
  EXPECT_EQ(p.user_message().rfind("Instruction: '", 0), 0u);
  EXPECT_EQ(extract_target(p.text), "A target sentence.");
  EXPECT_EQ(extract_target(render_prompt("It's 'quoted' text.", {}, {}).text), "It's 'quoted' text.");
  EXPECT_FALSE(extract_target("no template here").has_value());
}

TEST(Render, EmptyExplanationOmitted) {
  PromptExample e{"Some example text.", BiasLabel::kBiased, ""};
  const auto p = render_prompt("T.", std::span(&e, 1), PromptSettings{2 - 1, true, false});
  EXPECT_NE(p.text.find("Output: Let's think step by step. The answer is BIASED."), std::string::npos);
}

TEST(Pool, ParseErrors) {
  EXPECT_THROW(parse_pool_csv("text,label\nabc,MAYBE\n"), Error);
  EXPECT_THROW(parse_pool_csv("words,label\nabc,BIASED\n"), Error);
  const auto p = parse_pool_csv("text,label\nabc,BIASED\n");
  ASSERT_EQ(p.size(), 1u);
  EXPECT_TRUE(p[0].explanation.empty());
}

TEST(Cosine, Basics) {
  const std::vector<double> a = {1, 0}, b = {0, 2}, c = {3, 0}, z = {0, 0};
  EXPECT_DOUBLE_EQ(cosine(a, b), 0.0);
  EXPECT_DOUBLE_EQ(cosine(a, c), 1.0);
  EXPECT_EQ(cosine(a, z), 0.0);
  EXPECT_THROW(cosine(a, std::vector<double>{1, 2, 3}), Error);
}

TEST(HashingEmbedder, UnitNormAndDeterministic) {
  HashingEmbedder e(64);
  const auto v = e.embed("The mayor announced the plan.");
  ASSERT_EQ(v.dim(), 64u);
  double n = 0;
  for (double x : v.values) n += x * x;
  EXPECT_NEAR(n, 1.0, 1e-12);
  EXPECT_EQ(v.values, e.embed("the MAYOR announced the plan").values);
  EXPECT_EQ(e.embed("...").dim(), 64u);
  EXPECT_THROW(e.embed("   "), Error);
}

// Maps "v<i>" to the i-th stored vector.
class TableEmbedder final : public EmbeddingProvider {
 public:
  explicit TableEmbedder(std::vector<Embedding> rows) : rows_(std::move(rows)) {}
  Embedding embed(std::string_view text) const override {
    return rows_.at(static_cast<std::size_t>(std::stoul(std::string(text.substr(1)))));
  }
  std::size_t dim() const override { return rows_.front().dim(); }

 private:
  std::vector<Embedding> rows_;
};

TEST(Retrieval, MatchesBruteForce) {
  Rng rng(1234);
  const std::size_t n = 200, dim = 16;
  std::vector<Embedding> rows;
  for (std::size_t i = 0; i < n + 30; ++i) {
    Embedding e;
    for (std::size_t j = 0; j < dim; ++j) e.values.push_back(rng.uniform01() * 2 - 1);
    rows.push_back(e);
  }
  std::vector<Embedding> pool_vecs(rows.begin(), rows.begin() + n);
  std::vector<PromptExample> pool;
  for (std::size_t i = 0; i < n; ++i) pool.push_back({"v" + std::to_string(i), BiasLabel::kBiased, ""});
  ExampleRetriever retriever(pool, std::make_shared<TableEmbedder>(rows));
  for (std::size_t q = n; q < n + 30; ++q) {
    for (std::size_t k : {1u, 2u, 4u, 8u}) {
      const auto want = oracle::top_k(rows[q].values, pool_vecs, k);
      EXPECT_EQ(top_k_cosine(rows[q].values, pool_vecs, k), want);
      auto got = retriever.retrieve_indices("v" + std::to_string(q), k);
      std::reverse(got.begin(), got.end());
      EXPECT_EQ(got, want);
      EXPECT_EQ(retriever.retrieve_indices("v" + std::to_string(q), k, ExampleOrder::kMostSimilarFirst),
                want);
    }
  }
  EXPECT_THROW(top_k_cosine(rows[0].values, pool_vecs, n + 1), Error);
}

TEST(Retrieval, TiesGoToLowerIndexAndSelfIsNearest) {
  std::vector<Embedding> pool = {{{1, 0}}, {{0, 1}}, {{1, 0}}, {{2, 0}}};
  EXPECT_EQ(top_k_cosine(std::vector<double>{1, 0}, pool, 3), (std::vector<std::size_t>{0, 2, 3}));
  const auto p = shipped_pool();
  const auto hits = retrieve_examples(p[5].text, p, 1, std::make_shared<HashingEmbedder>());
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].text, p[5].text);
}

TEST(Retrieval, PoolOrderInvariance) {
  auto p = shipped_pool();
  auto provider = std::make_shared<HashingEmbedder>();
  // Top 3 similarities for this target are distinct; at k = 4 the cutoff
  // falls on a tie, which is broken by pool index and so is order-dependent.
  const std::string target = "The governor recklessly slashed funding for schools.";
  const auto a = retrieve_examples(target, p, 3, provider);
  std::reverse(p.begin(), p.end());
  const auto b = retrieve_examples(target, p, 3, provider);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].text, b[i].text);
}

TEST(BuildPrompt, DeterministicAndNearestLast) {
  const auto pool = shipped_pool();
  ExampleRetriever r(pool, std::make_shared<CachingEmbedder>(std::make_shared<HashingEmbedder>()));
  const std::string target = "The mayor's outrageous power grab has left residents fuming.";
  const auto a = build_prompt(target, r, parse_settings("4-shot-exp"));
  const auto b = build_prompt(target, r, parse_settings("4-shot-exp"));
  EXPECT_EQ(a.text, b.text);
  ASSERT_EQ(a.example_ids.size(), 4u);
  EXPECT_EQ(a.example_ids.back(), 11u);  // the identical pool sentence
}

}  // namespace
}  // namespace annolex::prompting
