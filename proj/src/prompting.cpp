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

#include "annolex/prompting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include "json.hpp"

#include "annolex/error.hpp"
#include "annolex/hash.hpp"
#include "annolex/http.hpp"
#include "annolex/io.hpp"
#include "annolex/text.hpp"

namespace annolex::prompting {

std::vector<PromptExample> parse_pool_csv(std::string_view content) {
  const io::CsvTable table = io::parse_csv(content);
  const std::size_t text_col = table.column("text");
  const std::size_t label_col = table.column("label");
  const auto expl_col = table.find_column("explanation");
  std::vector<PromptExample> pool;
  pool.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    auto label = parse_bias_label(row[label_col]);
    if (!label) {
      throw Error("prompting", "MalformedPool",
                  "row " + std::to_string(r + 1) + ": bad label '" + row[label_col] + "'");
    }
    if (text::trim(row[text_col]).empty()) {
      throw Error("prompting", "MalformedPool", "row " + std::to_string(r + 1) + ": empty text");
    }
    pool.push_back({row[text_col], *label, expl_col ? row[*expl_col] : std::string()});
  }
  return pool;
}

std::vector<PromptExample> read_pool_csv(const std::filesystem::path& path) {
  return parse_pool_csv(io::read_file(path));
}

std::string PromptSettings::name() const {
  std::string n = std::to_string(shots) + "-shot";
  if (with_system_preamble) n += "-sys";
  if (with_explanations) n += "-exp";
  return n;
}

const std::vector<PromptSettings>& benchmark_settings() {
  static const std::vector<PromptSettings> kSettings = {
      {0, false, false}, {0, false, true}, {0, true, false},
      {2, false, false}, {4, false, false}, {8, false, false},
      {2, true, false},  {4, true, false},  {8, true, false},
  };
  return kSettings;
}

PromptSettings parse_settings(std::string_view name) {
  for (int shots : {0, 2, 4, 8}) {
    for (int sys = 0; sys < 2; ++sys) {
      for (int exp = 0; exp < 2; ++exp) {
        PromptSettings s{shots, exp == 1, sys == 1};
        if (s.name() == name) return s;
      }
    }
  }
  throw Error("prompting", "UnknownSettings", "unknown prompt settings '" + std::string(name) + "'");
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error("prompting", "DimensionMismatch",
                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

Embedding HashingEmbedder::embed(std::string_view input) const {
  const std::string_view trimmed = text::trim(input);
  if (trimmed.empty()) throw Error("prompting", "EmptyText", "cannot embed blank text");
  if (dim_ == 0) throw Error("prompting", "InvalidArgument", "embedding dim must be positive");
  Embedding e;
  e.values.assign(dim_, 0.0);
  auto add = [&](std::string_view token) {
    const std::uint64_t h = splitmix64(fnv1a64(token) ^ seed_);
    e.values[h % dim_] += 1.0;
  };
  const auto tokens = text::word_tokens(trimmed);
  if (tokens.empty()) {
    add(trimmed);
  } else {
    for (const auto& t : tokens) add(t);
  }
  double norm = 0.0;
  for (double v : e.values) norm += v * v;
  norm = std::sqrt(norm);
  for (double& v : e.values) v /= norm;
  return e;
}

RemoteEmbeddingProvider::RemoteEmbeddingProvider(Options opts) : opts_(std::move(opts)) {
  http::parse_base_url(opts_.base_url);
  if (opts_.timeout_ms <= 0) {
    throw Error("prompting", "InvalidArgument", "timeout_ms must be positive");
  }
}

Embedding RemoteEmbeddingProvider::embed(std::string_view input) const {
  if (text::trim(input).empty()) throw Error("prompting", "EmptyText", "cannot embed blank text");
  nlohmann::json req = {{"model", opts_.model}, {"input", std::string(input)}};
  std::vector<std::pair<std::string, std::string>> headers;
  if (!opts_.api_key_env.empty()) {
    if (const char* key = std::getenv(opts_.api_key_env.c_str()); key && *key) {
      headers.emplace_back("Authorization", std::string("Bearer ") + key);
    }
  }
  const auto res = http::post_json(http::parse_base_url(opts_.base_url), "/embeddings",
                                   req.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace),
                                   headers, opts_.timeout_ms);
  if (res.status == 0) throw Error("prompting", "ProviderUnavailable", res.transport_error);
  if (res.status < 200 || res.status >= 300) {
    throw Error("prompting", "ProviderUnavailable", "HTTP " + std::to_string(res.status));
  }
  Embedding e;
  try {
    const auto j = nlohmann::json::parse(res.body);
    e.values = j.at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& ex) {
    throw Error("prompting", "ProviderUnavailable", std::string("malformed reply: ") + ex.what());
  }
  if (e.values.empty() || (opts_.dim != 0 && e.values.size() != opts_.dim)) {
    throw Error("prompting", "DimensionMismatch",
                "provider returned " + std::to_string(e.values.size()) + " values");
  }
  return e;
}

Embedding CachingEmbedder::embed(std::string_view input) const {
  const std::string key = sha256_hex(input);
  {
    std::lock_guard lock(mu_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  Embedding e = inner_->embed(input);
  std::lock_guard lock(mu_);
  return cache_.try_emplace(key, std::move(e)).first->second;
}

std::size_t CachingEmbedder::size() const {
  std::lock_guard lock(mu_);
  return cache_.size();
}

std::vector<std::size_t> top_k_cosine(std::span<const double> query,
                                      std::span<const Embedding> vectors, std::size_t k) {
  if (k > vectors.size()) {
    throw Error("prompting", "KTooLarge",
                "k=" + std::to_string(k) + " exceeds pool of " + std::to_string(vectors.size()));
  }
  std::vector<double> sim(vectors.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) sim[i] = cosine(query, vectors[i].values);
  std::vector<std::size_t> idx(vectors.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (sim[a] != sim[b]) return sim[a] > sim[b];
                      return a < b;
                    });
  idx.resize(k);
  return idx;
}

ExampleRetriever::ExampleRetriever(std::vector<PromptExample> pool,
                                   std::shared_ptr<const EmbeddingProvider> provider)
    : pool_(std::move(pool)), provider_(std::move(provider)) {
  embeddings_.reserve(pool_.size());
  for (const auto& ex : pool_) embeddings_.push_back(provider_->embed(ex.text));
}

std::vector<std::size_t> ExampleRetriever::retrieve_indices(std::string_view target,
                                                            std::size_t k,
                                                            ExampleOrder order) const {
  if (k > pool_.size()) {
    throw Error("prompting", "KTooLarge",
                "k=" + std::to_string(k) + " exceeds pool of " + std::to_string(pool_.size()));
  }
  if (k == 0) return {};
  const Embedding q = provider_->embed(target);
  auto idx = top_k_cosine(q.values, embeddings_, k);
  if (order == ExampleOrder::kMostSimilarLast) std::reverse(idx.begin(), idx.end());
  return idx;
}

std::vector<PromptExample> ExampleRetriever::retrieve(std::string_view target, std::size_t k,
                                                      ExampleOrder order) const {
  std::vector<PromptExample> out;
  for (std::size_t i : retrieve_indices(target, k, order)) out.push_back(pool_[i]);
  return out;
}

std::vector<PromptExample> retrieve_examples(std::string_view target,
                                             const std::vector<PromptExample>& pool,
                                             std::size_t k,
                                             std::shared_ptr<const EmbeddingProvider> provider) {
  return ExampleRetriever(pool, std::move(provider)).retrieve(target, k);
}

std::string RenderedPrompt::system_message() const {
  return settings.with_system_preamble ? std::string(kSystemPreamble) : std::string();
}

std::string RenderedPrompt::user_message() const {
  if (!settings.with_system_preamble) return text;
  const auto nl = text.find('\n');
  return nl == std::string::npos ? std::string() : text.substr(nl + 1);
}

RenderedPrompt render_prompt(std::string_view target, std::span<const PromptExample> examples,
                             const PromptSettings& settings,
                             std::vector<std::size_t> example_ids) {
  if (settings.shots < 0 || examples.size() != static_cast<std::size_t>(settings.shots)) {
    throw Error("prompting", "ShotMismatch",
                std::to_string(examples.size()) + " examples for " + settings.name());
  }
  std::string out;
  if (settings.with_system_preamble) {
    out += kSystemPreamble;
    out += '\n';
  }
  for (const auto& ex : examples) {
    out += "Instruction: '";
    out += ex.text;
    out += "'\n";
    out += kClassifyLine;
    out += '\n';
    out += kOutputLead;
    out += ' ';
    if (settings.with_explanations && !ex.explanation.empty()) {
      out += ex.explanation;
      out += ' ';
    }
    out += "The answer is ";
    out += to_string(ex.label);
    out += ".\n";
  }
  out += "Instruction: '";
  out += target;
  out += "'\n";
  out += kClassifyLine;
  out += '\n';
  if (settings.shots == 0 && settings.with_explanations) {
    out += kExplainLine;
    out += '\n';
  }
  out += kOutputLead;
  return {std::move(out), settings, std::move(example_ids)};
}

RenderedPrompt build_prompt(std::string_view target, const ExampleRetriever& retriever,
                            const PromptSettings& settings, ExampleOrder order) {
  const auto ids = retriever.retrieve_indices(target, static_cast<std::size_t>(settings.shots), order);
  std::vector<PromptExample> examples;
  examples.reserve(ids.size());
  for (std::size_t i : ids) examples.push_back(retriever.pool()[i]);
  return render_prompt(target, examples, settings, ids);
}

std::optional<std::string> extract_target(std::string_view prompt) {
  const std::string tail = "'\n" + std::string(kClassifyLine);
  const auto end = prompt.rfind(tail);
  if (end == std::string_view::npos) return std::nullopt;
  constexpr std::string_view kLead = "Instruction: '";
  std::size_t begin = std::string_view::npos;
  for (std::size_t pos = prompt.rfind(kLead, end); pos != std::string_view::npos;
       pos = pos == 0 ? std::string_view::npos : prompt.rfind(kLead, pos - 1)) {
    if (pos == 0 || prompt[pos - 1] == '\n') {
      begin = pos + kLead.size();
      break;
    }
  }
  if (begin == std::string_view::npos || begin > end) return std::nullopt;
  return std::string(prompt.substr(begin, end - begin));
}

}  // namespace annolex::prompting
