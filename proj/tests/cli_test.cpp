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

#include <sstream>

#include "annolex/cli.hpp"
#include "annolex/io.hpp"
#include "annolex/sampling.hpp"
#include "test_support.hpp"

namespace annolex::cli {
namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "annolex");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

TEST(Cli, VersionAndHelp) {
  const auto v = invoke({"--version"});
  EXPECT_EQ(v.code, 0);
  EXPECT_EQ(v.out, "1.0.0\n");
  EXPECT_EQ(invoke({"--help"}).code, 0);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(invoke({}).code, 2);
  EXPECT_EQ(invoke({"frobnicate"}).code, 2);
  EXPECT_EQ(invoke({"split", "--in", "x"}).code, 2);
  EXPECT_EQ(invoke({"sample", "pre", "--in", "a", "--weak", "b", "--out", "c", "--seed", "nope"}).code, 2);
}

TEST(Cli, DomainErrorsExitOneWithModuleName) {
  testing::TempDir dir;
  const auto r = invoke({"split", "--in", (dir / "missing.jsonl").string(), "--out", (dir / "o").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("io.", 0), 0u) << r.err;
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
  io::write_file_atomic(dir / "r.jsonl", "");
  const auto e = invoke({"split", "--in", (dir / "r.jsonl").string(), "--ratios", "0.9,0.9,0.1",
                         "--out", (dir / "o").string()});
  EXPECT_EQ(e.code, 1);
  EXPECT_EQ(e.err.rfind("sampling.InvalidRatios", 0), 0u) << e.err;
}

void write_labeled(const std::filesystem::path& path, std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    LabeledSentence s;
    s.sentence.sentence_id = "id" + std::to_string(100 + i);
    const bool biased = i % 2 == 0;
    s.sentence.text = biased ? "The council shamelessly wasted the budget again " + std::to_string(i)
                             : "The council approved the budget on Monday " + std::to_string(i);
    s.sentence.leaning = kAllLeanings[i % 5];
    s.sentence.outlet = "o";
    s.sentence.article_id = "a";
    s.label = biased ? BiasLabel::kBiased : BiasLabel::kNotBiased;
    out += io::dump_line(sampling::to_json(s)) + "\n";
  }
  io::write_file_atomic(path, out);
}

TEST(Cli, SplitTrainPredictScore) {
  testing::TempDir dir;
  write_labeled(dir / "labeled.jsonl", 100);
  ASSERT_EQ(invoke({"split", "--in", (dir / "labeled.jsonl").string(), "--seed", "3", "--out",
                    (dir / "ds").string()}).code,
            0);
  EXPECT_TRUE(std::filesystem::exists(dir / "ds" / "manifest.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "ds" / "splits" / "test.csv"));
  const auto manifest = nlohmann::json::parse(io::read_file(dir / "ds" / "manifest.json"));
  EXPECT_EQ(manifest["seeds"]["global"], 3);
  EXPECT_TRUE(manifest["outputs"].contains("dataset.csv"));

  const auto train = invoke({"baseline", "train", "--data", (dir / "ds" / "dataset.csv").string(),
                             "--epochs", "30", "--out", (dir / "model.txt").string()});
  ASSERT_EQ(train.code, 0) << train.err;
  const auto predict = invoke({"baseline", "predict", "--model", (dir / "model.txt").string(), "--in",
                               (dir / "ds" / "splits" / "test.csv").string(), "--out",
                               (dir / "preds.csv").string()});
  ASSERT_EQ(predict.code, 0) << predict.err;
  const auto score = invoke({"eval", "score", "--preds", (dir / "preds.csv").string(), "--gold",
                             (dir / "ds" / "dataset.csv").string(), "--split", "test", "--json"});
  ASSERT_EQ(score.code, 0) << score.err;
  const auto j = nlohmann::json::parse(score.out);
  EXPECT_DOUBLE_EQ(j["mcc"].get<double>(), 1.0);

  const auto coreset = invoke({"coreset", "--data", (dir / "ds" / "dataset.csv").string(), "--size",
                               "10", "--seed", "1", "--out", (dir / "core.csv").string()});
  ASSERT_EQ(coreset.code, 0) << coreset.err;
  EXPECT_EQ(sampling::read_dataset_csv(dir / "core.csv").items.size(), 10u);
}

TEST(Cli, ChecklistGenAndScore) {
  testing::TempDir dir;
  io::write_file_atomic(dir / "s.txt",
                        "Hawaii eyes even stricter gun laws.\nOfficials in Texas have approved 3 bills.\n");
  ASSERT_EQ(invoke({"checklist", "gen", "--suite", "inv-locations", "--in", (dir / "s.txt").string(),
                    "--out", (dir / "c.jsonl").string()}).code,
            0);
  io::write_file_atomic(dir / "p.csv",
                        "case_id,variant,label\ninv-locations-0000,original,BIASED\n"
                        "inv-locations-0000,perturbed,BIASED\ninv-locations-0001,original,BIASED\n"
                        "inv-locations-0001,perturbed,NOT BIASED\n");
  const auto r = invoke({"checklist", "score", "--cases", (dir / "c.jsonl").string(), "--preds",
                         (dir / "p.csv").string(), "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_DOUBLE_EQ(j["suites"][0]["pass_rate"].get<double>(), 0.5);
  EXPECT_EQ(invoke({"checklist", "score", "--cases", (dir / "c.jsonl").string()}).code, 2);
}

TEST(Cli, McNemarAndBenchmark) {
  testing::TempDir dir;
  std::string gold = "sentence_id,label\n", a = gold, b = gold;
  for (int i = 0; i < 12; ++i) {
    const std::string id = "s" + std::to_string(i);
    gold += id + ",BIASED\n";
    a += id + (i < 2 ? ",BIASED\n" : ",NOT BIASED\n");
    b += id + (i < 2 ? ",NOT BIASED\n" : ",BIASED\n");
  }
  io::write_file_atomic(dir / "gold.csv", gold);
  io::write_file_atomic(dir / "a.csv", a);
  io::write_file_atomic(dir / "b.csv", b);
  const auto r = invoke({"eval", "mcnemar", "--a", (dir / "a.csv").string(), "--b", (dir / "b.csv").string(),
                         "--gold", (dir / "gold.csv").string(), "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(nlohmann::json::parse(r.out)["p_value"].get<double>(), 158.0 / 4096.0, 1e-12);

  io::write_file_atomic(dir / "runs.cfg",
                        "[run.a0]\nmodel = A\nsettings = 0-shot\npreds = a.csv\n"
                        "[run.b0]\nmodel = B\nsettings = 0-shot\npreds = b.csv\n");
  const auto m = invoke({"eval", "benchmark", "--runs", (dir / "runs.cfg").string(), "--gold",
                         (dir / "gold.csv").string(), "--csv", (dir / "m.csv").string()});
  ASSERT_EQ(m.code, 0) << m.err;
  EXPECT_EQ(io::read_file(dir / "m.csv").substr(0, 19), "model,0-shot,mean\nA");
}

}  // namespace
}  // namespace annolex::cli
