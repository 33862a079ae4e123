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

#include <array>
#include <chrono>

#include "annolex/annotate.hpp"
#include "annolex/error.hpp"
#include "annolex/io.hpp"
#include "annolex/mock_server.hpp"
#include "annolex/text.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace annolex::annotate {
namespace {

using nlohmann::json;
using ms = std::chrono::milliseconds;

constexpr ParsedLabel kB = ParsedLabel::kBiased;
constexpr ParsedLabel kN = ParsedLabel::kNotBiased;
constexpr ParsedLabel kI = ParsedLabel::kInconclusive;

TEST(ParseLabel, HandcraftedCasesMatchExpectedAndOracle) {
  ASSERT_GE(oracle::parser_cases().size(), 20u);
  for (const auto& c : oracle::parser_cases()) {
    EXPECT_EQ(parse_label(c.raw), c.expected) << c.raw;
    EXPECT_EQ(oracle::parse_label(c.raw), c.expected) << c.raw;
  }
}

TEST(ParseLabel, CustomPhrases) {
  EXPECT_EQ(parse_label("Label: BIAS", {"BIAS"}, {"NO BIAS"}), kB);
  EXPECT_EQ(parse_label("Label: no bias", {"BIAS"}, {"NO BIAS"}), kN);
}

TEST(ParsedLabel, StringRoundTrip) {
  for (auto l : {kB, kN, kI}) EXPECT_EQ(parse_parsed_label(to_string(l)), l);
  EXPECT_FALSE(parse_parsed_label("maybe").has_value());
}

TEST(MajorityVote, AllTwentySevenTuplesBothPolicies) {
  const std::array<ParsedLabel, 3> values = {kB, kN, kI};
  int checked = 0;
  for (auto policy : {VotePolicy::kExcludeOnInconclusive, VotePolicy::kVoteDecisive}) {
    for (auto a : values)
      for (auto b : values)
        for (auto c : values) {
          const auto got = majority_vote("s", {{"x", a}, {"y", b}, {"z", c}}, policy);
          const auto want = oracle::vote({a, b, c}, policy);
          EXPECT_EQ(got.final_label, want.final_label);
          EXPECT_EQ(got.excluded_reason, want.excluded_reason);
          EXPECT_EQ(got.votes.size(), 3u);
          ++checked;
        }
  }
  EXPECT_EQ(checked, 54);
}

TEST(MajorityVote, RejectsEvenAndDuplicatePanels) {
  for (auto policy : {VotePolicy::kExcludeOnInconclusive, VotePolicy::kVoteDecisive}) {
    try {
      majority_vote("s", {{"x", kB}, {"y", kB}}, policy);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.name(), "EvenPanel");
    }
  }
  EXPECT_THROW(majority_vote("s", {}), Error);
  EXPECT_THROW(majority_vote("s", {{"x", kB}, {"x", kB}, {"y", kN}}), Error);
}

TEST(MajorityVote, JsonRoundTripKeepsVoteOrder) {
  const auto r = majority_vote("s1", {{"zeta", kB}, {"alpha", kI}, {"mid", kB}});
  const auto j = to_json(r);
  EXPECT_EQ(io::dump_line(j),
            "{\"sentence_id\":\"s1\",\"votes\":{\"zeta\":\"BIASED\",\"alpha\":\"?\",\"mid\":"
            "\"BIASED\"},\"final\":null,\"excluded_reason\":\"HasInconclusive\"}");
  const auto back = ensemble_from_json(j);
  EXPECT_EQ(back.votes, r.votes);
  EXPECT_EQ(back.excluded_reason, r.excluded_reason);
}

TEST(PromptHash, PureAndSensitive) {
  const auto h = prompt_hash("m", "prompt", 0.0);
  EXPECT_EQ(h.size(), 32u);
  EXPECT_EQ(h, prompt_hash("m", "prompt", 0.0));
  EXPECT_NE(h, prompt_hash("m2", "prompt", 0.0));
  EXPECT_NE(h, prompt_hash("m", "prompt!", 0.0));
  EXPECT_NE(h, prompt_hash("m", "prompt", 0.7));
}

TEST(VotePolicy, Names) {
  EXPECT_EQ(parse_vote_policy("vote-decisive"), VotePolicy::kVoteDecisive);
  EXPECT_EQ(parse_vote_policy("exclude-on-inconclusive"), VotePolicy::kExcludeOnInconclusive);
  EXPECT_THROW(parse_vote_policy("plurality"), Error);
}

TEST(Ensemble, LoadFromConfig) {
  const auto cfg = Config::parse(
      "[model.a]\nbase_url = http://h\nmodel_id = m1\n"
      "[model.b]\nbase_url = http://h\nmodel_id = m2\ntemperature = 0.5\nmax_retries = 1\n");
  const auto e = load_ensemble(cfg);
  ASSERT_EQ(e.size(), 2u);
  EXPECT_EQ(e[0].name, "a");
  EXPECT_EQ(e[1].model_id, "m2");
  EXPECT_DOUBLE_EQ(e[1].temperature, 0.5);
  EXPECT_EQ(e[1].max_retries, 1);
  EXPECT_THROW(load_ensemble(Config::parse("[model.a]\nmodel_id = m\n")), Error);
}

TEST(ResponseCache, PersistsAndSurvivesTornTail) {
  testing::TempDir dir;
  {
    ResponseCache cache(dir.path());
    cache.put({"h1", "m", json::object(), "one", 5});
    cache.put({"h2", "m", json::object(), "two", 6});
  }
  {
    std::ofstream f(dir / "responses.jsonl", std::ios::app);
    f << "{\"prompt_hash\":\"h3\",\"mod";
  }
  ResponseCache cache(dir.path());
  EXPECT_EQ(cache.size(), 2u);
  EXPECT_EQ(cache.get("h2")->response, "two");
  EXPECT_FALSE(cache.get("h3").has_value());
  cache.put({"h3", "m", json::object(), "three", 7});
  ResponseCache again(dir.path());
  EXPECT_EQ(again.size(), 3u);
  EXPECT_EQ(again.get("h3")->latency_ms, 7);
}

TEST(ResponseCache, CorruptMiddleLineIsAnError) {
  testing::TempDir dir;
  io::write_file_atomic(dir / "responses.jsonl", "garbage\n{}\n");
  EXPECT_THROW(ResponseCache{dir.path()}, Error);
}

TEST(ExtractMessageText, Shapes) {
  EXPECT_EQ(extract_message_text(R"({"choices":[{"message":{"content":"hi"}}]})"), "hi");
  EXPECT_THROW(extract_message_text(R"({"choices":[]})"), Error);
  EXPECT_THROW(extract_message_text("not json"), Error);
}

// ---------------------------------------------------------------------------

mock::MockScript script_with(const json& rules, const std::string& model = "m") {
  json s;
  s["models"][model]["rules"] = rules;
  s["models"][model]["default"] = "The answer is NOT BIASED.";
  return mock::MockScript(s);
}

ModelEndpointConfig endpoint(const std::string& url, int retries = 3) {
  ModelEndpointConfig c;
  c.name = "m";
  c.base_url = url;
  c.model_id = "m";
  c.max_retries = retries;
  c.requests_per_minute = 0;
  c.backoff_base_ms = 100;
  c.timeout_ms = 5000;
  return c;
}

prompting::RenderedPrompt prompt_for(const std::string& sentence) {
  return prompting::render_prompt(sentence, {}, prompting::PromptSettings{});
}

TEST(ChatClient, RetriesTransientFailuresWithBackoff) {
  mock::MockServer server(script_with(json::array(
      {{{"pattern", "flaky"}, {"response", "The answer is BIASED."}, {"fail_first", 2}}})));
  server.start();
  testing::TempDir dir;
  std::vector<ms> sleeps;
  ChatClient client(endpoint(server.base_url()), std::make_shared<ResponseCache>(dir.path()),
                    [&](ms d) { sleeps.push_back(d); });
  const auto c = client.complete(prompt_for("A flaky sentence here."));
  EXPECT_EQ(c.text, "The answer is BIASED.");
  EXPECT_FALSE(c.from_cache);
  EXPECT_EQ(client.network_calls(), 3u);
  ASSERT_EQ(sleeps.size(), 2u);
  EXPECT_GE(sleeps[0].count(), 100);
  EXPECT_LE(sleeps[0].count(), 125);
  EXPECT_GE(sleeps[1].count(), 200);
  EXPECT_LE(sleeps[1].count(), 250);
  // Cached: no further traffic.
  const auto again = client.complete(prompt_for("A flaky sentence here."));
  EXPECT_TRUE(again.from_cache);
  EXPECT_EQ(client.network_calls(), 3u);
  server.stop();
}

TEST(ChatClient, ExhaustsRetries) {
  mock::MockServer server(script_with(json::array(
      {{{"pattern", "down"}, {"response", "x"}, {"fail_first", 10}, {"status", 429}}})));
  server.start();
  testing::TempDir dir;
  ChatClient client(endpoint(server.base_url(), 2), std::make_shared<ResponseCache>(dir.path()),
                    [](ms) {});
  try {
    client.complete(prompt_for("The service is down today."));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.name(), "EndpointExhausted");
  }
  EXPECT_EQ(client.network_calls(), 3u);
  server.stop();
}

TEST(ChatClient, NonTransientStatusFailsAtOnce) {
  mock::MockServer server(script_with(json::array(
      {{{"pattern", "bad"}, {"response", "x"}, {"fail_first", 10}, {"status", 400}}})));
  server.start();
  testing::TempDir dir;
  ChatClient client(endpoint(server.base_url()), std::make_shared<ResponseCache>(dir.path()),
                    [](ms) {});
  try {
    client.complete(prompt_for("A bad request sentence."));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.name(), "EndpointRejected");
  }
  EXPECT_EQ(client.network_calls(), 1u);
  server.stop();
}

TEST(ChatClient, MalformedPayload) {
  mock::MockServer server(
      script_with(json::array({{{"pattern", "odd"}, {"response", "x"}, {"malformed", true}}})));
  server.start();
  testing::TempDir dir;
  ChatClient client(endpoint(server.base_url()), std::make_shared<ResponseCache>(dir.path()),
                    [](ms) {});
  EXPECT_THROW(client.complete(prompt_for("An odd reply sentence.")), Error);
  server.stop();
}

TEST(ChatClient, RequestBodyCarriesSystemMessageOnlyWithPreamble) {
  testing::TempDir dir;
  ChatClient client(endpoint("http://127.0.0.1:1"), std::make_shared<ResponseCache>(dir.path()));
  prompting::PromptSettings sys;
  sys.with_system_preamble = true;
  const auto with = client.request_body(prompting::render_prompt("Some sentence here.", {}, sys));
  ASSERT_EQ(with["messages"].size(), 2u);
  EXPECT_EQ(with["messages"][0]["role"], "system");
  EXPECT_EQ(with["messages"][0]["content"], "You are an expert in media bias.");
  const auto without = client.request_body(prompt_for("Some sentence here."));
  ASSERT_EQ(without["messages"].size(), 1u);
  EXPECT_EQ(without["messages"][0]["role"], "user");
  EXPECT_EQ(without["temperature"], 0.0);
}

TEST(RateLimiter, SpacesRequests) {
  RateLimiter limiter(1200);  // 50 ms apart
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 4; ++i) limiter.acquire();
  EXPECT_GE(std::chrono::steady_clock::now() - t0, ms(145));
}

// ---------------------------------------------------------------------------

std::vector<SentenceRecord> sentences(std::initializer_list<std::pair<const char*, const char*>> items) {
  std::vector<SentenceRecord> out;
  for (const auto& [id, t] : items) {
    SentenceRecord s;
    s.sentence_id = id;
    s.text = t;
    out.push_back(s);
  }
  return out;
}

TEST(AnnotationJob, AggregatesAndIsolatesFailures) {
  json s;
  for (const char* m : {"a", "b", "c"}) {
    s["models"][m]["rules"] = json::array(
        {{{"pattern", "loaded"}, {"response", "The answer is BIASED."}},
         {{"pattern", "split"}, {"response", std::string(m) == "a" ? "Unsure." : "The answer is BIASED."}}});
    s["models"][m]["default"] = "The answer is NOT BIASED.";
  }
  s["models"]["c"]["rules"].push_back(
      {{"pattern", "broken"}, {"response", "x"}, {"fail_first", 99}, {"status", 400}});
  s["models"]["c"]["rules"].insert(s["models"]["c"]["rules"].begin(),
                                   s["models"]["c"]["rules"].back());
  mock::MockServer server{mock::MockScript(s)};
  server.start();
  testing::TempDir dir;
  std::vector<ModelEndpointConfig> ens;
  for (const char* m : {"a", "b", "c"}) {
    auto e = endpoint(server.base_url());
    e.name = m;
    e.model_id = m;
    ens.push_back(e);
  }
  prompting::ExampleRetriever retriever({}, std::make_shared<prompting::HashingEmbedder>());
  JobConfig cfg;
  cfg.cache_dir = dir / "cache";
  cfg.max_failure_ratio = 0.5;
  const auto in = sentences({{"s3", "A loaded and unfair sentence."},
                             {"s1", "A plain factual sentence."},
                             {"s2", "A split decision sentence."},
                             {"s4", "A broken endpoint sentence."}});
  const auto job = run_annotation_job(in, retriever, ens, cfg, [](ms) {});
  ASSERT_EQ(job.results.size(), 4u);
  EXPECT_EQ(job.results[0].sentence_id, "s1");
  EXPECT_EQ(job.results[0].final_label, BiasLabel::kNotBiased);
  EXPECT_EQ(job.results[1].excluded_reason, ExcludedReason::kHasInconclusive);
  EXPECT_EQ(job.results[2].final_label, BiasLabel::kBiased);
  EXPECT_EQ(job.results[3].excluded_reason, ExcludedReason::kEndpointFailure);
  ASSERT_EQ(job.results[3].failures.size(), 1u);
  EXPECT_EQ(job.results[3].failures[0], (std::pair<std::string, std::string>{"c", "EndpointRejected"}));
  EXPECT_EQ(job.stats.labeled, 2u);
  EXPECT_EQ(job.stats.inconclusive, 1u);
  EXPECT_EQ(job.stats.failed, 1u);
  EXPECT_EQ(job.records.size(), 11u);

  write_job_outputs(job, dir / "out");
  EXPECT_EQ(read_ensemble_jsonl(dir / "out" / "ensemble.jsonl").size(), 4u);
  EXPECT_EQ(io::read_jsonl(dir / "out" / "inconclusive.jsonl").size(), 1u);

  cfg.max_failure_ratio = 0.1;
  try {
    run_annotation_job(in, retriever, ens, cfg, [](ms) {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.name(), "JobFailed");
  }
  server.stop();
}

TEST(AnnotationJob, RejectsEvenEnsembleAndDuplicateIds) {
  prompting::ExampleRetriever retriever({}, std::make_shared<prompting::HashingEmbedder>());
  JobConfig cfg;
  testing::TempDir dir;
  cfg.cache_dir = dir.path();
  auto e = endpoint("http://127.0.0.1:1");
  auto e2 = e;
  e2.name = "other";
  EXPECT_THROW(run_annotation_job(sentences({{"a", "A sentence."}}), retriever, {e, e2}, cfg),
               Error);
  EXPECT_THROW(run_annotation_job(sentences({{"a", "One sentence."}, {"a", "Two sentence."}}),
                                  retriever, {e}, cfg),
               Error);
}

}  // namespace
}  // namespace annolex::annotate
