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
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "annolex/types.hpp"

// Few-shot chain-of-thought prompts with similarity-based example retrieval.
namespace annolex::prompting {

inline constexpr std::string_view kSystemPreamble = "You are an expert in media bias.";
inline constexpr std::string_view kClassifyLine =
    "Classify the sentence above as BIASED or NOT BIASED.";
inline constexpr std::string_view kOutputLead = "Output: Let's think step by step.";
/// Extra line of the explanatory zero-shot setting, placed between the
/// classify line and the output lead of the target block.
inline constexpr std::string_view kExplainLine =
    "Briefly explain your reasoning before giving the answer.";

/// A labeled demonstration.
struct PromptExample {
  std::string text;
  BiasLabel label = BiasLabel::kNotBiased;
  std::string explanation;
};

/// CSV with header `text,label,explanation`; label is BIASED or NOT BIASED.
std::vector<PromptExample> parse_pool_csv(std::string_view content);
std::vector<PromptExample> read_pool_csv(const std::filesystem::path& path);

struct PromptSettings {
  int shots = 0;  // 0, 2, 4 or 8
  bool with_explanations = false;
  bool with_system_preamble = false;

  /// "0-shot", "0-shot-sys", "0-shot-exp", "8-shot-exp", "2-shot-sys-exp", ...
  std::string name() const;
  friend bool operator==(const PromptSettings&, const PromptSettings&) = default;
};

/// The nine benchmark settings in table order: 0-shot, 0-shot-sys,
/// 0-shot-exp, 2-shot, 4-shot, 8-shot, 2-shot-exp, 4-shot-exp, 8-shot-exp.
const std::vector<PromptSettings>& benchmark_settings();

/// Parses names produced by PromptSettings::name(). Throws
/// Error("prompting", "UnknownSettings").
PromptSettings parse_settings(std::string_view name);

// ---------------------------------------------------------------------------
// Embeddings

struct Embedding {
  std::vector<double> values;
  std::size_t dim() const { return values.size(); }
};

/// Cosine similarity; 0 when either vector is zero. Throws
/// Error("prompting", "DimensionMismatch").
double cosine(std::span<const double> a, std::span<const double> b);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  /// Throws Error("prompting", "EmptyText") for blank text.
  virtual Embedding embed(std::string_view text) const = 0;
  virtual std::size_t dim() const = 0;
};

/// Offline default: signless feature hashing of lowercased word tokens into
/// `dim` buckets, L2-normalized. Text with no word tokens hashes its trimmed
/// bytes as a single token, so every non-blank text gets a unit vector.
class HashingEmbedder final : public EmbeddingProvider {
 public:
  explicit HashingEmbedder(std::size_t dim = 256, std::uint64_t seed = 0)
      : dim_(dim), seed_(seed) {}
  Embedding embed(std::string_view text) const override;
  std::size_t dim() const override { return dim_; }

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

/// OpenAI-style `POST {base_url}/embeddings` provider. Transport failures and
/// non-2xx replies raise Error("prompting", "ProviderUnavailable").
class RemoteEmbeddingProvider final : public EmbeddingProvider {
 public:
  struct Options {
    std::string base_url;
    std::string model;
    std::size_t dim = 0;  // expected dimension; 0 accepts whatever comes back
    int timeout_ms = 30000;
    std::string api_key_env;  // environment variable holding a bearer token
  };
  explicit RemoteEmbeddingProvider(Options opts);
  Embedding embed(std::string_view text) const override;
  std::size_t dim() const override { return opts_.dim; }

 private:
  Options opts_;
};

/// Memoizes another provider by SHA-256 of the text. Safe to share between
/// threads; lookups and inserts are serialized by one mutex.
class CachingEmbedder final : public EmbeddingProvider {
 public:
  explicit CachingEmbedder(std::shared_ptr<const EmbeddingProvider> inner)
      : inner_(std::move(inner)) {}
  Embedding embed(std::string_view text) const override;
  std::size_t dim() const override { return inner_->dim(); }
  std::size_t size() const;

 private:
  std::shared_ptr<const EmbeddingProvider> inner_;
  mutable std::mutex mu_;
  mutable std::unordered_map<std::string, Embedding> cache_;
};

// ---------------------------------------------------------------------------
// Retrieval

/// Indices of the k vectors most cosine-similar to `query`, most similar
/// first; equal similarities rank the lower index first. Throws
/// Error("prompting", "KTooLarge") when k > vectors.size().
std::vector<std::size_t> top_k_cosine(std::span<const double> query,
                                      std::span<const Embedding> vectors, std::size_t k);

enum class ExampleOrder {
  kMostSimilarLast,   // default: nearest example sits right above the target
  kMostSimilarFirst,
};

/// Embeds the pool once and answers k-nearest queries against it.
class ExampleRetriever {
 public:
  ExampleRetriever(std::vector<PromptExample> pool,
                   std::shared_ptr<const EmbeddingProvider> provider);

  /// Pool indices in render order.
  std::vector<std::size_t> retrieve_indices(std::string_view target, std::size_t k,
                                            ExampleOrder order = ExampleOrder::kMostSimilarLast) const;
  std::vector<PromptExample> retrieve(std::string_view target, std::size_t k,
                                      ExampleOrder order = ExampleOrder::kMostSimilarLast) const;

  const std::vector<PromptExample>& pool() const { return pool_; }

 private:
  std::vector<PromptExample> pool_;
  std::vector<Embedding> embeddings_;
  std::shared_ptr<const EmbeddingProvider> provider_;
};

/// One-shot convenience over ExampleRetriever.
std::vector<PromptExample> retrieve_examples(std::string_view target,
                                             const std::vector<PromptExample>& pool,
                                             std::size_t k,
                                             std::shared_ptr<const EmbeddingProvider> provider);

// ---------------------------------------------------------------------------
// Rendering

struct RenderedPrompt {
  std::string text;
  PromptSettings settings;
  std::vector<std::size_t> example_ids;

  /// The preamble when enabled, otherwise empty.
  std::string system_message() const;
  /// `text` without the preamble line.
  std::string user_message() const;
};

/// Renders the template:
///
///     [You are an expert in media bias.]
///     Instruction: '{TEXT}'
///     Classify the sentence above as BIASED or NOT BIASED.
///     Output: Let's think step by step. [{EXPLANATION} ]The answer is {LABEL}.
///     ... one block per example ...
///     Instruction: '{SENTENCE}'
///     Classify the sentence above as BIASED or NOT BIASED.
///     Output: Let's think step by step.
///
/// Lines are joined with '\n' and there is no trailing newline. Throws
/// Error("prompting", "ShotMismatch") unless examples.size() == shots.
RenderedPrompt render_prompt(std::string_view target, std::span<const PromptExample> examples,
                             const PromptSettings& settings,
                             std::vector<std::size_t> example_ids = {});

/// Retrieval plus rendering for one target sentence.
RenderedPrompt build_prompt(std::string_view target, const ExampleRetriever& retriever,
                            const PromptSettings& settings,
                            ExampleOrder order = ExampleOrder::kMostSimilarLast);

/// The target sentence of a rendered prompt (text between the quotes of the
/// last Instruction line), or nullopt when the prompt does not follow the
/// template.
std::optional<std::string> extract_target(std::string_view prompt);

}  // namespace annolex::prompting
