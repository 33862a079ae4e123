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

#include "annolex/io.hpp"
#include "test_support.hpp"

namespace annolex::testing {
namespace {

TEST(Pipeline, GoldenDigestsAndWarmCache) {
  MockPipeline p;
  const auto cold = p.run("cold");
  EXPECT_GT(cold.network_calls, 600u);  // 600 prompts plus scripted retries
  const auto digests = digest_outputs(p.out("cold"));
  const auto golden = read_digest_file(golden_dir() / "pipeline.sha256");
  for (const auto& name : golden_outputs()) {
    EXPECT_EQ(digests.at(name), golden.at(name)) << name;
  }
  const auto served = p.server().request_count();
  const auto warm = p.run("warm");
  EXPECT_EQ(warm.network_calls, 0u);
  EXPECT_EQ(warm.cache_hits, 600u);
  EXPECT_EQ(p.server().request_count(), served);
  EXPECT_EQ(digest_outputs(p.out("warm")), digests);

  const auto manifest = nlohmann::json::parse(io::read_file(p.out("cold") / "manifest.json"));
  EXPECT_EQ(manifest["seeds"]["global"], 7);
  EXPECT_TRUE(manifest["outputs"].contains("annotate/ensemble.jsonl"));
  EXPECT_TRUE(manifest["stats"]["annotate"].contains("network_calls"));
}

TEST(Pipeline, EnsembleLabelsTrackGoldTraining) {
  MockPipeline p;
  const auto report = p.run("out");
  const auto& ev = report.eval;
  const double agreement = ev["ensemble_vs_gold"]["accuracy"].get<double>();
  EXPECT_GE(agreement, 0.8);
  EXPECT_LE(agreement, 0.9);
  const double syn = ev["synthetic_trained_vs_gold"]["mcc"].get<double>();
  const double gold = ev["gold_trained_vs_gold"]["mcc"].get<double>();
  EXPECT_LE(std::abs(gold - syn), 0.1);
}

}  // namespace
}  // namespace annolex::testing
