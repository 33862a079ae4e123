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


#include "annolex/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <unordered_map>

#include "CLI11.hpp"
#include "annolex/annotate.hpp"
#include "annolex/baseline.hpp"
#include "annolex/checklist.hpp"
#include "annolex/config.hpp"
#include "annolex/corpus.hpp"
#include "annolex/error.hpp"
#include "annolex/hash.hpp"
#include "annolex/io.hpp"
#include "annolex/manifest.hpp"
#include "annolex/metrics.hpp"
#include "annolex/mock_server.hpp"
#include "annolex/prompting.hpp"
#include "annolex/sampling.hpp"
#include "annolex/text.hpp"

namespace annolex::cli {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

fs::path data_dir() {
  if (const char* env = std::getenv("ANNOLEX_DATA_DIR"); env && *env) return env;
  return ANNOLEX_DATA_DIR;
}

namespace {

// ---------------------------------------------------------------------------
// Shared helpers

std::vector<SentenceRecord> read_sentence_records(const fs::path& path) {
  return corpus::read_sentences(path);
}

std::vector<corpus::ArticleRecord> read_article_input(const fs::path& path) {
  return fs::is_directory(path) ? corpus::read_article_dir(path) : corpus::read_articles(path);
}

std::vector<LabeledSentence> labeled_from_ensemble(const std::vector<SentenceRecord>& sentences,
                                                   const std::vector<annotate::EnsembleResult>& ens) {
  std::unordered_map<std::string, const SentenceRecord*> by_id;
  for (const auto& s : sentences) by_id.emplace(s.sentence_id, &s);
  std::vector<LabeledSentence> out;
  for (const auto& r : ens) {
    if (!r.final_label) continue;
    auto it = by_id.find(r.sentence_id);
    if (it == by_id.end()) {
      throw Error("sampling", "UnknownSentence", "ensemble result for unknown id " + r.sentence_id);
    }
    out.push_back({*it->second, *r.final_label});
  }
  return out;
}

std::string labeled_to_jsonl(const std::vector<LabeledSentence>& items) {
  std::vector<nlohmann::ordered_json> docs;
  for (const auto& i : items) docs.push_back(sampling::to_json(i));
  return io::to_jsonl(docs);
}

std::vector<LabeledSentence> read_labeled_jsonl(const fs::path& path) {
  std::vector<LabeledSentence> out;
  for (const auto& j : io::read_jsonl(path)) out.push_back(sampling::labeled_from_json(j));
  return out;
}

void write_split_outputs(const sampling::LabeledDataset& ds, const fs::path& dir) {
  io::write_file_atomic(dir / "dataset.csv", sampling::dataset_to_csv(ds));
  for (auto s : {sampling::Split::kTrain, sampling::Split::kDev, sampling::Split::kTest}) {
    io::write_file_atomic(dir / "splits" / (std::string(sampling::to_string(s)) + ".csv"),
                          sampling::dataset_to_csv(ds, s));
  }
}

// Texts with ids from JSONL sentence records, plain JSONL {"text"} rows, a
// dataset CSV or a plain text file.
std::vector<std::pair<std::string, std::string>> read_texts(const fs::path& path) {
  std::vector<std::pair<std::string, std::string>> out;
  const auto ext = path.extension().string();
  if (ext == ".csv") {
    const auto table = io::read_csv(path);
    const auto id = table.column("sentence_id");
    const auto text = table.column("text");
    for (const auto& row : table.rows) out.emplace_back(row[id], row[text]);
  } else if (ext == ".jsonl") {
    std::size_t n = 0;
    for (const auto& j : io::read_jsonl(path)) {
      if (!j.is_object() || !j.contains("text") || !j["text"].is_string()) {
        throw Error("io", "MalformedRecord", path.string() + ": row without a text field");
      }
      std::string id = j.contains("sentence_id") && j["sentence_id"].is_string()
                           ? j["sentence_id"].get<std::string>()
                           : std::to_string(n);
      out.emplace_back(std::move(id), j["text"].get<std::string>());
      ++n;
    }
  } else {
    std::size_t n = 0;
    for (auto& s : checklist::read_sentence_lines(path)) out.emplace_back(std::to_string(n++), s);
  }
  return out;
}

baseline::TrainConfig train_config_from(const Config& cfg, std::uint64_t seed) {
  baseline::TrainConfig t;
  t.learning_rate = cfg.get_double("baseline", "learning_rate", t.learning_rate);
  t.l2_lambda = cfg.get_double("baseline", "l2_lambda", t.l2_lambda);
  t.epochs = static_cast<int>(cfg.get_int("baseline", "epochs", t.epochs));
  t.batch_size = static_cast<int>(cfg.get_int("baseline", "batch_size", t.batch_size));
  t.seed = seed;
  return t;
}

baseline::Model train_on(const std::vector<LabeledSentence>& items, const baseline::TrainConfig& t,
                         std::size_t min_df) {
  std::vector<std::string> texts;
  std::vector<BiasLabel> labels;
  for (const auto& i : items) {
    texts.push_back(i.sentence.text);
    labels.push_back(i.label);
  }
  return baseline::train(texts, labels, t, min_df);
}

nlohmann::ordered_json score_json(const metrics::ConfusionCounts& c) {
  const auto p = metrics::prf1(c);
  nlohmann::ordered_json j;
  j["n"] = c.total();
  j["tp"] = c.tp;
  j["fp"] = c.fp;
  j["tn"] = c.tn;
  j["fn"] = c.fn;
  j["precision"] = p.precision;
  j["recall"] = p.recall;
  j["f1"] = p.f1;
  j["mcc"] = metrics::mcc(c);
  j["accuracy"] = metrics::accuracy(c);
  return j;
}

std::string score_text(const metrics::ConfusionCounts& c) {
  const auto p = metrics::prf1(c);
  std::string out;
  out += "n          " + std::to_string(c.total()) + "\n";
  out += "tp fp tn fn " + std::to_string(c.tp) + " " + std::to_string(c.fp) + " " +
         std::to_string(c.tn) + " " + std::to_string(c.fn) + "\n";
  out += "precision  " + metrics::format_fixed(p.precision, 4) + "\n";
  out += "recall     " + metrics::format_fixed(p.recall, 4) + "\n";
  out += "f1         " + metrics::format_fixed(p.f1, 4) + "\n";
  out += "mcc        " + metrics::format_fixed(metrics::mcc(c), 4) + "\n";
  out += "accuracy   " + metrics::format_fixed(metrics::accuracy(c), 4) + "\n";
  return out;
}

nlohmann::ordered_json mcnemar_json(const metrics::McNemarResult& r) {
  nlohmann::ordered_json j;
  j["b"] = r.b;
  j["c"] = r.c;
  j["statistic"] = r.statistic;
  j["p_value"] = r.p_value;
  j["method"] = std::string(metrics::to_string(r.method));
  return j;
}

prompting::PromptSettings settings_from(const std::string& name, std::optional<int> shots,
                                        bool explanations, bool system_preamble) {
  prompting::PromptSettings s = name.empty() ? prompting::PromptSettings{} : prompting::parse_settings(name);
  if (shots) {
    if (*shots != 0 && *shots != 2 && *shots != 4 && *shots != 8) {
      throw Error("prompting", "UnknownSettings", "shots must be 0, 2, 4 or 8");
    }
    s.shots = *shots;
  }
  if (explanations) s.with_explanations = true;
  if (system_preamble) s.with_system_preamble = true;
  return s;
}

std::shared_ptr<const prompting::EmbeddingProvider> make_embedder(const Config& cfg) {
  const auto kind = cfg.get_or("prompting", "embedder", "hashing");
  const auto dim = static_cast<std::size_t>(cfg.get_int("prompting", "embedding_dim", 256));
  if (kind == "hashing") {
    return std::make_shared<prompting::HashingEmbedder>(
        dim, static_cast<std::uint64_t>(cfg.get_int("prompting", "embedding_seed", 0)));
  }
  if (kind == "remote") {
    prompting::RemoteEmbeddingProvider::Options o;
    o.base_url = cfg.require("prompting", "embedding_url");
    o.model = cfg.get_or("prompting", "embedding_model", "");
    o.dim = static_cast<std::size_t>(cfg.get_int("prompting", "embedding_dim", 0));
    o.api_key_env = cfg.get_or("prompting", "embedding_api_key_env", "");
    return std::make_shared<prompting::CachingEmbedder>(
        std::make_shared<prompting::RemoteEmbeddingProvider>(o));
  }
  throw Error("config", "BadValue", "prompting.embedder must be hashing or remote");
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

template <typename F>
auto timed(RunManifest& m, const std::string& stage, F&& f) {
  const auto t0 = Clock::now();
  if constexpr (std::is_void_v<decltype(f())>) {
    f();
    m.add_timing(stage, Clock::now() - t0);
  } else {
    auto r = f();
    m.add_timing(stage, Clock::now() - t0);
    return r;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Pipeline

PipelineReport run_pipeline(const fs::path& config_path, const fs::path& out_dir,
                            std::optional<std::uint64_t> seed_override,
                            const std::vector<std::string>& argv) {
  const Config cfg = Config::load(config_path);
  const fs::path base = config_path.parent_path().empty() ? fs::path(".") : config_path.parent_path();
  const std::uint64_t seed =
      seed_override ? *seed_override : static_cast<std::uint64_t>(cfg.get_int("", "seed", 0));
  fs::create_directories(out_dir);
  RunManifest manifest(argv);
  manifest.set_config(cfg.snapshot());
  manifest.add_seed("global", seed);
  manifest.add_input(config_path);

  // corpus
  const fs::path articles_path = resolve(base, cfg.require("pipeline", "articles"));
  manifest.add_input(articles_path);
  corpus::CorpusStats corpus_stats;
  const auto sentences = timed(manifest, "corpus", [&] {
    auto s = corpus::build_corpus(read_article_input(articles_path),
                                  corpus::CorpusConfig::from_config(cfg), &corpus_stats);
    io::write_file_atomic(out_dir / "sentences.jsonl", corpus::sentences_to_jsonl(s));
    return s;
  });
  manifest.add_stat("corpus", {{"articles", corpus_stats.articles},
                               {"rating_disagreements", corpus_stats.rating_disagreements},
                               {"filtered_out", corpus_stats.filtered_out},
                               {"segments", corpus_stats.segments},
                               {"dropped_by_cleaning", corpus_stats.dropped_by_cleaning},
                               {"sentences", corpus_stats.sentences}});

  // presample
  const fs::path weak_path = resolve(base, cfg.require("pipeline", "weak_labels"));
  manifest.add_input(weak_path);
  const std::uint64_t presample_seed = sub_seed(seed, "sampling.presample");
  manifest.add_seed("sampling.presample", presample_seed);
  const auto presampled = timed(manifest, "presample", [&] {
    std::optional<std::size_t> quota;
    if (cfg.has("sampling", "quota")) {
      quota = static_cast<std::size_t>(cfg.get_int("sampling", "quota", 0));
    }
    auto pool = sampling::join_weak_labels(sentences, io::read_jsonl(weak_path));
    auto picked = sampling::presample_balanced(pool, quota, presample_seed);
    std::vector<nlohmann::ordered_json> docs;
    for (const auto& w : picked) docs.push_back(sampling::to_json(w));
    io::write_file_atomic(out_dir / "presampled.jsonl", io::to_jsonl(docs));
    return picked;
  });

  // annotate
  const fs::path pool_path = resolve(base, cfg.require("prompting", "pool"));
  manifest.add_input(pool_path);
  Config ensemble_cfg = cfg;
  if (cfg.has("annotate", "ensemble")) {
    const fs::path ens = resolve(base, cfg.require("annotate", "ensemble"));
    manifest.add_input(ens);
    ensemble_cfg = Config::load(ens);
  }
  annotate::JobConfig job_cfg;
  job_cfg.settings = prompting::parse_settings(cfg.get_or("prompting", "settings", "8-shot-exp"));
  if (cfg.has("prompting", "order")) {
    const auto order = cfg.require("prompting", "order");
    if (order == "most-similar-first") job_cfg.order = prompting::ExampleOrder::kMostSimilarFirst;
    else if (order != "most-similar-last") throw Error("config", "BadValue", "prompting.order");
  }
  job_cfg.policy = annotate::parse_vote_policy(
      cfg.get_or("annotate", "policy", "exclude-on-inconclusive"));
  job_cfg.max_failure_ratio = cfg.get_double("annotate", "max_failure_ratio", 0.1);
  job_cfg.cache_dir = cfg.has("annotate", "cache_dir")
                          ? resolve(base, cfg.require("annotate", "cache_dir"))
                          : out_dir / "cache";
  const auto job = timed(manifest, "annotate", [&] {
    std::vector<SentenceRecord> targets;
    for (const auto& w : presampled) targets.push_back(w.sentence);
    prompting::ExampleRetriever retriever(prompting::read_pool_csv(pool_path), make_embedder(cfg));
    auto j = annotate::run_annotation_job(targets, retriever, annotate::load_ensemble(ensemble_cfg),
                                          job_cfg);
    annotate::write_job_outputs(j, out_dir / "annotate");
    return j;
  });
  manifest.add_stat("annotate", {{"sentences", job.stats.sentences},
                                 {"labeled", job.stats.labeled},
                                 {"inconclusive", job.stats.inconclusive},
                                 {"ties", job.stats.ties},
                                 {"failed", job.stats.failed},
                                 {"network_calls", job.stats.network_calls},
                                 {"cache_hits", job.stats.cache_hits}});

  // postsample
  const std::uint64_t post_seed = sub_seed(seed, "sampling.postsample");
  manifest.add_seed("sampling.postsample", post_seed);
  const auto labeled = timed(manifest, "postsample", [&] {
    auto l = sampling::postsample_balanced(labeled_from_ensemble(job.sentences, job.results),
                                           post_seed);
    io::write_file_atomic(out_dir / "labeled.jsonl", labeled_to_jsonl(l));
    return l;
  });

  // split
  const std::uint64_t split_seed = sub_seed(seed, "sampling.split");
  manifest.add_seed("sampling.split", split_seed);
  const auto dataset = timed(manifest, "split", [&] {
    auto ds = sampling::split_dataset(
        labeled, sampling::parse_ratios(cfg.get_or("sampling", "ratios", "0.7,0.15,0.15")),
        split_seed);
    write_split_outputs(ds, out_dir);
    return ds;
  });

  // baseline
  const std::uint64_t baseline_seed = sub_seed(seed, "baseline");
  manifest.add_seed("baseline", baseline_seed);
  const auto train_cfg = train_config_from(cfg, baseline_seed);
  const auto min_df = static_cast<std::size_t>(cfg.get_int("baseline", "min_df", 2));
  const auto train_items = dataset.subset(sampling::Split::kTrain);
  const auto model = timed(manifest, "baseline", [&] {
    auto m = train_on(train_items, train_cfg, min_df);
    baseline::save_model(m, out_dir / "model.txt");
    return m;
  });

  // eval
  PipelineReport report;
  report.network_calls = job.stats.network_calls;
  report.cache_hits = job.stats.cache_hits;
  timed(manifest, "eval", [&] {
    const auto test_items = dataset.subset(sampling::Split::kTest);
    std::vector<std::pair<std::string, BiasLabel>> preds;
    std::vector<BiasLabel> pred_labels, synthetic;
    for (const auto& i : test_items) {
      const auto label = baseline::predict(model, i.sentence.text).second;
      preds.emplace_back(i.sentence.sentence_id, label);
      pred_labels.push_back(label);
      synthetic.push_back(i.label);
    }
    io::write_file_atomic(out_dir / "predictions.csv", metrics::labels_to_csv(preds));
    nlohmann::ordered_json ev;
    ev["test_size"] = test_items.size();
    if (!test_items.empty()) ev["baseline_vs_synthetic"] = score_json(metrics::confusion(pred_labels, synthetic));
    if (cfg.has("pipeline", "gold")) {
      const fs::path gold_path = resolve(base, cfg.require("pipeline", "gold"));
      manifest.add_input(gold_path);
      std::unordered_map<std::string, BiasLabel> gold;
      for (const auto& [id, l] : metrics::read_labels_csv(gold_path)) gold.emplace(id, l);
      auto gold_of = [&](const std::string& id) {
        auto it = gold.find(id);
        if (it == gold.end()) throw Error("metrics", "MissingPrediction", "no gold label for " + id);
        return it->second;
      };
      // Annotator quality over every labeled sentence.
      std::vector<BiasLabel> ens_labels, ens_gold;
      for (const auto& r : job.results) {
        if (!r.final_label) continue;
        ens_labels.push_back(*r.final_label);
        ens_gold.push_back(gold_of(r.sentence_id));
      }
      if (!ens_labels.empty()) ev["ensemble_vs_gold"] = score_json(metrics::confusion(ens_labels, ens_gold));
      // Same training sentences, gold labels: the human-label reference.
      std::vector<LabeledSentence> gold_train = train_items;
      for (auto& i : gold_train) i.label = gold_of(i.sentence.sentence_id);
      const auto gold_model = train_on(gold_train, train_cfg, min_df);
      baseline::save_model(gold_model, out_dir / "model_gold.txt");
      std::vector<BiasLabel> test_gold, gold_preds;
      for (const auto& i : test_items) {
        test_gold.push_back(gold_of(i.sentence.sentence_id));
        gold_preds.push_back(baseline::predict(gold_model, i.sentence.text).second);
      }
      if (!test_items.empty()) {
        const auto syn = metrics::confusion(pred_labels, test_gold);
        const auto hum = metrics::confusion(gold_preds, test_gold);
        ev["synthetic_trained_vs_gold"] = score_json(syn);
        ev["gold_trained_vs_gold"] = score_json(hum);
        ev["mcc_gap"] = metrics::mcc(hum) - metrics::mcc(syn);
        try {
          ev["mcnemar"] = mcnemar_json(metrics::mcnemar(pred_labels, gold_preds, test_gold));
        } catch (const Error& e) {
          if (e.name() != "NoDisagreements") throw;
          ev["mcnemar"] = nullptr;
        }
      }
    }
    io::write_file_atomic(out_dir / "eval.json", ev.dump(2) + "\n");
    report.eval = ev;
  });

  // checklist
  const std::uint64_t checklist_seed = sub_seed(seed, "checklist");
  manifest.add_seed("checklist", checklist_seed);
  timed(manifest, "checklist", [&] {
    const fs::path lex_dir = cfg.has("checklist", "lexicons")
                                 ? resolve(base, cfg.require("checklist", "lexicons"))
                                 : data_dir() / "lexicons";
    const fs::path factual = cfg.has("checklist", "factual")
                                 ? resolve(base, cfg.require("checklist", "factual"))
                                 : data_dir() / "checklist" / "factual.txt";
    const auto lex = checklist::load_lexicons(lex_dir);
    std::vector<std::string> texts;
    for (const auto& i : dataset.items) texts.push_back(i.item.sentence.text);
    std::vector<checklist::PerturbationCase> cases;
    for (const auto& suite : checklist::suite_names()) {
      auto part = suite == checklist::kMftFactual
                      ? checklist::gen_mft_factual(checklist::read_sentence_lines(factual))
                      : checklist::generate_suite(suite, texts, lex, checklist_seed);
      cases.insert(cases.end(), part.begin(), part.end());
    }
    std::vector<nlohmann::ordered_json> docs;
    for (const auto& c : cases) docs.push_back(checklist::to_json(c));
    io::write_file_atomic(out_dir / "checklist" / "cases.jsonl", io::to_jsonl(docs));
    const auto rep = checklist::score_suite(
        cases, [&](const std::string& t) { return baseline::predict(model, t).second; });
    io::write_file_atomic(out_dir / "checklist" / "report.json", rep.to_json().dump(2) + "\n");
  });

  manifest.write(out_dir);
  return report;
}

// ---------------------------------------------------------------------------
// Command line

namespace {

struct Dispatch {
  CLI::App* cmd;
  std::function<void()> action;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"annolex: ensemble LLM annotation pipeline and dataset factory", "annolex"};
  app.set_version_flag("--version", std::string(ANNOLEX_VERSION));
  app.require_subcommand(1);
  std::vector<Dispatch> commands;
  std::uint64_t seed = 0;
  auto add_seed = [&](CLI::App* c) {
    c->add_option("--seed", seed, "Global seed; modules derive their own sub-seeds")
        ->capture_default_str();
  };
  const std::vector<std::string> argv_copy = args;

  // corpus build
  auto* corpus_cmd = app.add_subcommand("corpus", "Build the sentence corpus");
  corpus_cmd->require_subcommand(1);
  struct {
    std::string in, out, config;
  } corpus_opt;
  auto* corpus_build = corpus_cmd->add_subcommand("build", "Articles JSONL -> sentences JSONL");
  corpus_build->add_option("--in", corpus_opt.in, "Articles JSONL file or directory")->required();
  corpus_build->add_option("--out", corpus_opt.out, "Sentences JSONL")->required();
  corpus_build->add_option("--config", corpus_opt.config, "Config file ([corpus] section)");
  commands.push_back({corpus_build, [&] {
    const Config cfg = corpus_opt.config.empty() ? Config() : Config::load(corpus_opt.config);
    corpus::CorpusStats stats;
    const auto s = corpus::build_corpus(read_article_input(corpus_opt.in),
                                        corpus::CorpusConfig::from_config(cfg), &stats);
    io::write_file_atomic(corpus_opt.out, corpus::sentences_to_jsonl(s));
    out << "articles " << stats.articles << ", filtered " << stats.filtered_out
        << ", rating disagreements " << stats.rating_disagreements << ", sentences "
        << stats.sentences << "\n";
  }});

  // sample pre / post
  auto* sample_cmd = app.add_subcommand("sample", "Balance sentences before or after annotation");
  sample_cmd->require_subcommand(1);
  struct {
    std::string in, weak, out, sentences, ensemble;
    std::optional<std::size_t> quota;
  } sample_opt;
  auto* sample_pre = sample_cmd->add_subcommand("pre", "Equal cells over leaning x weak label");
  sample_pre->add_option("--in", sample_opt.in, "Sentences JSONL")->required();
  sample_pre->add_option("--weak", sample_opt.weak, "Weak labels JSONL {sentence_id, weak_score}")
      ->required();
  sample_pre->add_option("--quota", sample_opt.quota, "Items per cell (default: smallest cell)");
  sample_pre->add_option("--out", sample_opt.out, "Presampled JSONL")->required();
  add_seed(sample_pre);
  commands.push_back({sample_pre, [&] {
    const auto pool = sampling::join_weak_labels(read_sentence_records(sample_opt.in),
                                                 io::read_jsonl(sample_opt.weak));
    const auto picked =
        sampling::presample_balanced(pool, sample_opt.quota, sub_seed(seed, "sampling.presample"));
    std::vector<nlohmann::ordered_json> docs;
    for (const auto& w : picked) docs.push_back(sampling::to_json(w));
    io::write_file_atomic(sample_opt.out, io::to_jsonl(docs));
    out << picked.size() << " sentences\n";
  }});
  auto* sample_post = sample_cmd->add_subcommand("post", "1:1 labels within each leaning");
  sample_post->add_option("--sentences", sample_opt.sentences, "Sentences JSONL")->required();
  sample_post->add_option("--ensemble", sample_opt.ensemble, "ensemble.jsonl")->required();
  sample_post->add_option("--out", sample_opt.out, "Labeled JSONL")->required();
  add_seed(sample_post);
  commands.push_back({sample_post, [&] {
    const auto labeled = sampling::postsample_balanced(
        labeled_from_ensemble(read_sentence_records(sample_opt.sentences),
                              annotate::read_ensemble_jsonl(sample_opt.ensemble)),
        sub_seed(seed, "sampling.postsample"));
    io::write_file_atomic(sample_opt.out, labeled_to_jsonl(labeled));
    out << labeled.size() << " sentences\n";
  }});

  // split
  struct {
    std::string in, out, ratios = "0.7,0.15,0.15";
  } split_opt;
  auto* split_cmd = app.add_subcommand("split", "Stratified train/dev/test split");
  split_cmd->add_option("--in", split_opt.in, "Labeled JSONL")->required();
  split_cmd->add_option("--ratios", split_opt.ratios, "train,dev,test")->capture_default_str();
  split_cmd->add_option("--out", split_opt.out, "Output directory")->required();
  add_seed(split_cmd);
  commands.push_back({split_cmd, [&] {
    RunManifest manifest(argv_copy);
    manifest.add_input(split_opt.in);
    const auto split_seed = sub_seed(seed, "sampling.split");
    manifest.add_seed("global", seed);
    manifest.add_seed("sampling.split", split_seed);
    const auto ds = sampling::split_dataset(read_labeled_jsonl(split_opt.in),
                                            sampling::parse_ratios(split_opt.ratios), split_seed);
    write_split_outputs(ds, split_opt.out);
    manifest.write(split_opt.out);
    out << ds.items.size() << " items\n";
  }});

  // coreset
  struct {
    std::string data, split = "train", out;
    std::size_t size = 0;
    std::size_t min_df = 2;
  } coreset_opt;
  auto* coreset_cmd = app.add_subcommand("coreset", "k-center greedy subset of a dataset split");
  coreset_cmd->add_option("--data", coreset_opt.data, "Dataset CSV")->required();
  coreset_cmd->add_option("--split", coreset_opt.split, "Split to select from (or 'all')")
      ->capture_default_str();
  coreset_cmd->add_option("--size", coreset_opt.size, "Subset size")->required();
  coreset_cmd->add_option("--min-df", coreset_opt.min_df, "Vocabulary min document frequency")
      ->capture_default_str();
  coreset_cmd->add_option("--out", coreset_opt.out, "Subset CSV")->required();
  add_seed(coreset_cmd);
  commands.push_back({coreset_cmd, [&] {
    const auto ds = sampling::read_dataset_csv(coreset_opt.data);
    sampling::LabeledDataset pool;
    for (const auto& i : ds.items) {
      if (coreset_opt.split == "all" ||
          sampling::to_string(i.split) == std::string_view(coreset_opt.split)) {
        pool.items.push_back(i);
      }
    }
    std::vector<std::string> texts;
    for (const auto& i : pool.items) texts.push_back(i.item.sentence.text);
    const auto vocab = baseline::Vocabulary::build(texts, coreset_opt.min_df);
    std::vector<SparseVector> feats;
    for (const auto& t : texts) feats.push_back(baseline::featurize(t, vocab));
    auto chosen = sampling::coreset_select(
        feats.size(), coreset_opt.size, sub_seed(seed, "sampling.coreset"),
        [&](std::size_t a, std::size_t b) { return euclidean_distance(feats[a], feats[b]); });
    std::sort(chosen.begin(), chosen.end());
    sampling::LabeledDataset subset;
    for (auto i : chosen) subset.items.push_back(pool.items[i]);
    io::write_file_atomic(coreset_opt.out, sampling::dataset_to_csv(subset));
    out << subset.items.size() << " items\n";
  }});

  // annotate run / mock-serve
  auto* annotate_cmd = app.add_subcommand("annotate", "Query the annotator ensemble");
  annotate_cmd->require_subcommand(1);
  struct {
    std::string sentences, pool, settings, ensemble, out, cache, policy = "exclude-on-inconclusive";
    std::optional<int> shots;
    bool explanations = false, system_preamble = false;
    double max_failure_ratio = 0.1;
    std::string script, host = "127.0.0.1";
    int port = 8080;
  } ann;
  auto* annotate_run = annotate_cmd->add_subcommand("run", "Annotate sentences by majority vote");
  annotate_run->add_option("--sentences", ann.sentences, "Sentences JSONL")->required();
  annotate_run->add_option("--pool", ann.pool, "Example pool CSV text,label,explanation")->required();
  annotate_run->add_option("--settings", ann.settings, "Named setting, e.g. 8-shot-exp");
  annotate_run->add_option("--shots", ann.shots, "0, 2, 4 or 8");
  annotate_run->add_flag("--explanations", ann.explanations, "Include example explanations");
  annotate_run->add_flag("--system-preamble", ann.system_preamble, "Send the system preamble");
  annotate_run->add_option("--ensemble", ann.ensemble, "Endpoint config with [model.NAME] sections")
      ->required();
  annotate_run->add_option("--policy", ann.policy, "exclude-on-inconclusive or vote-decisive")
      ->capture_default_str();
  annotate_run->add_option("--max-failure-ratio", ann.max_failure_ratio)->capture_default_str();
  annotate_run->add_option("--cache", ann.cache, "Response cache directory (default <out>/cache)");
  annotate_run->add_option("--out", ann.out, "Output directory")->required();
  commands.push_back({annotate_run, [&] {
    const Config ens = Config::load(ann.ensemble);
    annotate::JobConfig job_cfg;
    job_cfg.settings = settings_from(ann.settings, ann.shots, ann.explanations, ann.system_preamble);
    job_cfg.policy = annotate::parse_vote_policy(ann.policy);
    job_cfg.max_failure_ratio = ann.max_failure_ratio;
    job_cfg.cache_dir = ann.cache.empty() ? fs::path(ann.out) / "cache" : fs::path(ann.cache);
    RunManifest manifest(argv_copy);
    manifest.set_config(ens.snapshot());
    manifest.add_input(ann.sentences);
    manifest.add_input(ann.pool);
    manifest.add_input(ann.ensemble);
    prompting::ExampleRetriever retriever(prompting::read_pool_csv(ann.pool), make_embedder(ens));
    const auto t0 = Clock::now();
    const auto job = annotate::run_annotation_job(read_sentence_records(ann.sentences), retriever,
                                                  annotate::load_ensemble(ens), job_cfg);
    manifest.add_timing("annotate", Clock::now() - t0);
    annotate::write_job_outputs(job, ann.out);
    manifest.add_stat("network_calls", job.stats.network_calls);
    manifest.add_stat("cache_hits", job.stats.cache_hits);
    manifest.write(ann.out);
    out << job.stats.sentences << " sentences: " << job.stats.labeled << " labeled, "
        << job.stats.inconclusive << " inconclusive, " << job.stats.ties << " ties, "
        << job.stats.failed << " failed; " << job.stats.network_calls << " network calls\n";
  }});
  auto* mock_serve = annotate_cmd->add_subcommand("mock-serve", "Serve a scripted mock endpoint");
  mock_serve->add_option("--script", ann.script, "Mock script JSON")->required();
  mock_serve->add_option("--host", ann.host)->capture_default_str();
  mock_serve->add_option("--port", ann.port)->capture_default_str();
  commands.push_back({mock_serve, [&] {
    mock::MockServer server(mock::MockScript::load(ann.script));
    out << "listening on http://" << ann.host << ":" << ann.port << std::endl;
    server.serve(ann.host, ann.port);
  }});

  // eval score / mcnemar / benchmark
  auto* eval_cmd = app.add_subcommand("eval", "Score predictions");
  eval_cmd->require_subcommand(1);
  struct {
    std::string preds, gold, a, b, runs, split, csv;
    bool json = false;
  } ev;
  auto* eval_score = eval_cmd->add_subcommand("score", "P/R/F1/MCC against gold labels");
  eval_score->add_option("--preds", ev.preds, "Predictions CSV sentence_id,label")->required();
  eval_score->add_option("--gold", ev.gold, "Gold CSV sentence_id,label")->required();
  eval_score->add_option("--split", ev.split, "Only gold rows of this split");
  eval_score->add_flag("--json", ev.json);
  auto gold_of = [&] {
    return metrics::read_labels_csv(ev.gold, ev.split.empty() ? std::nullopt
                                                              : std::optional<std::string>(ev.split));
  };
  auto gold_labels = [](const std::vector<std::pair<std::string, BiasLabel>>& g) {
    std::vector<BiasLabel> out;
    for (const auto& [id, l] : g) out.push_back(l);
    return out;
  };
  commands.push_back({eval_score, [&] {
    const auto gold = gold_of();
    const auto c = metrics::confusion(metrics::align_to(metrics::read_labels_csv(ev.preds), gold),
                                      gold_labels(gold));
    out << (ev.json ? score_json(c).dump(2) + "\n" : score_text(c));
  }});
  auto* eval_mcnemar = eval_cmd->add_subcommand("mcnemar", "Paired test of two classifiers");
  eval_mcnemar->add_option("--a", ev.a, "Predictions CSV of classifier A")->required();
  eval_mcnemar->add_option("--b", ev.b, "Predictions CSV of classifier B")->required();
  eval_mcnemar->add_option("--gold", ev.gold, "Gold CSV")->required();
  eval_mcnemar->add_option("--split", ev.split, "Only gold rows of this split");
  eval_mcnemar->add_flag("--json", ev.json);
  commands.push_back({eval_mcnemar, [&] {
    const auto gold = gold_of();
    const auto r = metrics::mcnemar(metrics::align_to(metrics::read_labels_csv(ev.a), gold),
                                    metrics::align_to(metrics::read_labels_csv(ev.b), gold),
                                    gold_labels(gold));
    if (ev.json) {
      out << mcnemar_json(r).dump(2) << "\n";
    } else {
      out << "b " << r.b << "\nc " << r.c << "\nmethod " << metrics::to_string(r.method)
          << "\nstatistic " << metrics::format_fixed(r.statistic, 6) << "\np_value "
          << metrics::format_fixed(r.p_value, 6) << "\n";
    }
  }});
  auto* eval_bench = eval_cmd->add_subcommand("benchmark", "MCC matrix over models x settings");
  eval_bench->add_option("--runs", ev.runs, "Config with [run.NAME] model/settings/preds")->required();
  eval_bench->add_option("--gold", ev.gold, "Gold CSV")->required();
  eval_bench->add_option("--split", ev.split, "Only gold rows of this split");
  eval_bench->add_option("--csv", ev.csv, "Also write the matrix as CSV");
  eval_bench->add_flag("--json", ev.json);
  commands.push_back({eval_bench, [&] {
    const Config runs_cfg = Config::load(ev.runs);
    const fs::path base = fs::path(ev.runs).parent_path();
    const auto gold = gold_of();
    std::vector<metrics::BenchmarkRun> runs;
    for (const auto& sec : runs_cfg.sections_with_prefix("run.")) {
      metrics::BenchmarkRun r;
      r.model = runs_cfg.require(sec, "model");
      r.settings = runs_cfg.require(sec, "settings");
      r.preds = metrics::align_to(
          metrics::read_labels_csv(resolve(base, runs_cfg.require(sec, "preds"))), gold);
      runs.push_back(std::move(r));
    }
    std::vector<std::string> order;
    for (const auto& s : prompting::benchmark_settings()) order.push_back(s.name());
    std::vector<std::string> used_order;
    for (const auto& name : order) {
      for (const auto& r : runs) {
        if (r.settings == name) {
          used_order.push_back(name);
          break;
        }
      }
    }
    const auto m = metrics::benchmark_matrix(runs, gold_labels(gold), used_order);
    if (!ev.csv.empty()) io::write_file_atomic(ev.csv, m.to_csv());
    out << (ev.json ? m.to_json().dump(2) + "\n" : m.to_text());
  }});

  // checklist gen / score
  auto* checklist_cmd = app.add_subcommand("checklist", "Behavioral test suites");
  checklist_cmd->require_subcommand(1);
  struct {
    std::string suite, in, out, lexicons, cases, preds, model;
    bool json = false;
  } chk;
  auto* checklist_gen = checklist_cmd->add_subcommand("gen", "Generate a suite");
  checklist_gen->add_option("--suite", chk.suite,
                            "mft-factual, inv-locations, inv-pronouns, inv-prejudice or "
                            "dir-loaded-words")
      ->required();
  checklist_gen->add_option("--in", chk.in, "Sentences (.jsonl, .csv or plain text lines)")->required();
  checklist_gen->add_option("--lexicons", chk.lexicons, "Lexicon directory");
  checklist_gen->add_option("--out", chk.out, "Cases JSONL")->required();
  add_seed(checklist_gen);
  commands.push_back({checklist_gen, [&] {
    std::vector<std::string> texts;
    for (auto& [id, t] : read_texts(chk.in)) texts.push_back(std::move(t));
    const auto lex = checklist::load_lexicons(chk.lexicons.empty() ? data_dir() / "lexicons"
                                                                   : fs::path(chk.lexicons));
    const auto cases = checklist::generate_suite(chk.suite, texts, lex, sub_seed(seed, "checklist"));
    std::vector<nlohmann::ordered_json> docs;
    for (const auto& c : cases) docs.push_back(checklist::to_json(c));
    io::write_file_atomic(chk.out, io::to_jsonl(docs));
    out << cases.size() << " cases\n";
  }});
  auto* checklist_score = checklist_cmd->add_subcommand("score", "Score a classifier on cases");
  checklist_score->add_option("--cases", chk.cases, "Cases JSONL")->required();
  auto* preds_opt =
      checklist_score->add_option("--preds", chk.preds, "Predictions CSV case_id,variant,label");
  auto* model_opt = checklist_score->add_option("--model", chk.model, "Baseline weights file");
  preds_opt->excludes(model_opt);
  checklist_score->add_flag("--json", chk.json);
  commands.push_back({checklist_score, [&] {
    const auto cases = checklist::read_cases_jsonl(chk.cases);
    checklist::ChecklistReport rep;
    if (!chk.preds.empty()) {
      rep = checklist::score_with_predictions(cases, checklist::read_case_predictions(chk.preds));
    } else if (!chk.model.empty()) {
      const auto model = baseline::load_model(chk.model);
      rep = checklist::score_suite(
          cases, [&](const std::string& t) { return baseline::predict(model, t).second; });
    } else {
      throw CLI::RequiredError("--preds or --model");
    }
    out << (chk.json ? rep.to_json().dump(2) + "\n" : rep.to_text());
  }});

  // baseline train / predict
  auto* baseline_cmd = app.add_subcommand("baseline", "Bag-of-words logistic regression");
  baseline_cmd->require_subcommand(1);
  struct {
    std::string data, split = "train", out, model, in, cases;
    baseline::TrainConfig train;
    std::size_t min_df = 2;
  } bl;
  auto* baseline_train = baseline_cmd->add_subcommand("train", "Train on a dataset split");
  baseline_train->add_option("--data", bl.data, "Dataset CSV")->required();
  baseline_train->add_option("--split", bl.split, "train, dev, test or all")->capture_default_str();
  baseline_train->add_option("--lr", bl.train.learning_rate)->capture_default_str();
  baseline_train->add_option("--l2", bl.train.l2_lambda)->capture_default_str();
  baseline_train->add_option("--epochs", bl.train.epochs)->capture_default_str();
  baseline_train->add_option("--batch-size", bl.train.batch_size)->capture_default_str();
  baseline_train->add_option("--min-df", bl.min_df)->capture_default_str();
  baseline_train->add_option("--out", bl.out, "Weights file")->required();
  add_seed(baseline_train);
  commands.push_back({baseline_train, [&] {
    const auto ds = sampling::read_dataset_csv(bl.data);
    std::vector<LabeledSentence> items;
    if (bl.split == "all") {
      for (const auto& i : ds.items) items.push_back(i.item);
    } else {
      auto s = sampling::parse_split(bl.split);
      if (!s) throw Error("sampling", "UnknownSplit", "unknown split '" + bl.split + "'");
      items = ds.subset(*s);
    }
    bl.train.seed = sub_seed(seed, "baseline");
    double final_loss = 0.0;
    std::vector<std::string> texts;
    std::vector<BiasLabel> labels;
    for (const auto& i : items) {
      texts.push_back(i.sentence.text);
      labels.push_back(i.label);
    }
    const auto model = baseline::train(texts, labels, bl.train, bl.min_df, &final_loss);
    baseline::save_model(model, bl.out);
    out << "vocab " << model.vocab.size() << ", final loss " << metrics::format_fixed(final_loss, 6)
        << "\n";
  }});
  auto* baseline_predict = baseline_cmd->add_subcommand("predict", "Predict labels");
  baseline_predict->add_option("--model", bl.model, "Weights file")->required();
  auto* in_opt = baseline_predict->add_option("--in", bl.in, "Sentences (.jsonl, .csv or text)");
  auto* cases_opt = baseline_predict->add_option("--cases", bl.cases, "Checklist cases JSONL");
  in_opt->excludes(cases_opt);
  baseline_predict->add_option("--out", bl.out, "Predictions CSV")->required();
  commands.push_back({baseline_predict, [&] {
    const auto model = baseline::load_model(bl.model);
    std::string csv;
    if (!bl.cases.empty()) {
      csv = io::csv_line({"case_id", "variant", "label"});
      for (const auto& c : checklist::read_cases_jsonl(bl.cases)) {
        csv += io::csv_line({c.case_id, "original",
                             std::string(to_string(baseline::predict(model, c.original).second))});
        csv += io::csv_line({c.case_id, "perturbed",
                             std::string(to_string(baseline::predict(model, c.perturbed).second))});
      }
    } else if (!bl.in.empty()) {
      csv = io::csv_line({"sentence_id", "label", "probability"});
      for (const auto& [id, t] : read_texts(bl.in)) {
        const auto [p, label] = baseline::predict(model, t);
        csv += io::csv_line({id, std::string(to_string(label)), metrics::format_fixed(p, 6)});
      }
    } else {
      throw CLI::RequiredError("--in or --cases");
    }
    io::write_file_atomic(bl.out, csv);
  }});

  // pipeline run
  auto* pipeline_cmd = app.add_subcommand("pipeline", "End-to-end run from one config");
  pipeline_cmd->require_subcommand(1);
  struct {
    std::string config, out;
    std::optional<std::uint64_t> seed;
  } pl;
  auto* pipeline_run = pipeline_cmd->add_subcommand("run", "corpus through checklist");
  pipeline_run->add_option("--config", pl.config, "Pipeline config")->required();
  pipeline_run->add_option("--out", pl.out, "Output directory")->required();
  pipeline_run->add_option("--seed", pl.seed, "Overrides the config's root seed");
  commands.push_back({pipeline_run, [&] {
    const auto report = run_pipeline(pl.config, pl.out, pl.seed, argv_copy);
    out << "network calls " << report.network_calls << ", cache hits " << report.cache_hits << "\n";
  }});

  std::vector<char*> raw;
  std::vector<std::string> storage = args.empty() ? std::vector<std::string>{"annolex"} : args;
  for (auto& s : storage) raw.push_back(s.data());
  try {
    app.parse(static_cast<int>(raw.size()), raw.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    for (auto& d : commands) {
      if (d.cmd->parsed()) {
        d.action();
        return 0;
      }
    }
    err << app.help();
    return 2;
  } catch (const CLI::ParseError& e) {
    err << "usage: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << e.describe() << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    err << "io.FilesystemError: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "internal.Unexpected: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace annolex::cli
