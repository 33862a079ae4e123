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

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

#include "annolex/config.hpp"
#include "annolex/prompting.hpp"
#include "annolex/types.hpp"

// Chat-completion annotators, response parsing and majority-vote aggregation.
namespace annolex::annotate {

struct ModelEndpointConfig {
  std::string name;
  std::string base_url;
  std::string model_id;
  double temperature = 0.0;
  int max_tokens = 256;
  int timeout_ms = 60000;
  int max_retries = 3;
  int requests_per_minute = 60;  // 0 disables rate limiting
  std::string api_key_env;       // name of the variable, never the key
  int workers = 4;
  int backoff_base_ms = 1000;
  double backoff_factor = 2.0;
  double backoff_jitter = 0.25;  // fraction of the delay added at random

  /// Throws Error("annotate", "InvalidEndpoint").
  void validate() const;
};

/// Reads every `[model.NAME]` section, in file order. Throws
/// Error("annotate", "DuplicateModelName") and config errors.
std::vector<ModelEndpointConfig> load_ensemble(const Config& cfg);

enum class ParsedLabel : std::uint8_t { kNotBiased = 0, kBiased = 1, kInconclusive = 2 };

/// "NOT BIASED", "BIASED" or "?".
std::string_view to_string(ParsedLabel label);
std::optional<ParsedLabel> parse_parsed_label(std::string_view s);

/// Counts case-insensitive, non-overlapping phrase occurrences scanning left
/// to right and trying longer phrases first, so "NOT BIASED" consumes its
/// "BIASED". Occurrences must start and end on word boundaries ("unbiased"
/// does not count). A space inside a phrase matches any run of whitespace or
/// hyphens. The strictly larger class wins; zero or equal counts give
/// kInconclusive.
ParsedLabel parse_label(std::string_view raw,
                        const std::vector<std::string>& positives = {"BIASED"},
                        const std::vector<std::string>& negatives = {"NOT BIASED"});

struct AnnotationRecord {
  std::string sentence_id;
  std::string model_name;
  std::string prompt_hash;
  std::string raw_response;
  ParsedLabel parsed = ParsedLabel::kInconclusive;
  std::int64_t latency_ms = 0;

  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

nlohmann::ordered_json to_json(const AnnotationRecord& r);
AnnotationRecord annotation_from_json(const nlohmann::json& j);

enum class VotePolicy { kExcludeOnInconclusive, kVoteDecisive };
std::string_view to_string(VotePolicy p);
VotePolicy parse_vote_policy(std::string_view s);

enum class ExcludedReason { kHasInconclusive, kTie, kEndpointFailure };
std::string_view to_string(ExcludedReason r);

struct EnsembleResult {
  std::string sentence_id;
  /// In ensemble order.
  std::vector<std::pair<std::string, ParsedLabel>> votes;
  std::optional<BiasLabel> final_label;
  std::optional<ExcludedReason> excluded_reason;
  /// model name -> error name, for endpoints that failed on this sentence.
  std::vector<std::pair<std::string, std::string>> failures;
};

nlohmann::ordered_json to_json(const EnsembleResult& r);

/// Aggregates one vote per model. Throws Error("annotate", "EvenPanel") for
/// an even or empty panel and Error("annotate", "DuplicateModelVote").
EnsembleResult majority_vote(std::string_view sentence_id,
                             const std::vector<std::pair<std::string, ParsedLabel>>& votes,
                             VotePolicy policy = VotePolicy::kExcludeOnInconclusive);
EnsembleResult majority_vote(const std::vector<AnnotationRecord>& records,
                             VotePolicy policy = VotePolicy::kExcludeOnInconclusive);

/// Pure function of (model_id, rendered prompt text, temperature): 32 hex
/// digits of SHA-256.
std::string prompt_hash(std::string_view model_id, std::string_view prompt_text,
                        double temperature);

// ---------------------------------------------------------------------------
// Cache

struct CacheEntry {
  std::string prompt_hash;
  std::string model_id;
  nlohmann::ordered_json request;
  std::string response;
  std::int64_t latency_ms = 0;
};

/// Append-only JSONL response cache with an in-memory index. Appends are
/// serialized and flushed before put() returns. A truncated last line left
/// by a crash is ignored on load.
class ResponseCache {
 public:
  /// Opens (creating if needed) `dir/responses.jsonl`.
  explicit ResponseCache(const std::filesystem::path& dir);

  std::optional<CacheEntry> get(const std::string& hash) const;
  void put(const CacheEntry& entry);
  std::size_t size() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, CacheEntry> index_;
  std::ofstream out_;
};

// ---------------------------------------------------------------------------
// Client

/// Spaces request start times at least 60000/rpm ms apart. Shared by all
/// workers of one endpoint.
class RateLimiter {
 public:
  explicit RateLimiter(int requests_per_minute);
  void acquire();

 private:
  std::chrono::steady_clock::duration interval_;
  std::mutex mu_;
  std::chrono::steady_clock::time_point next_;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;
Sleeper real_sleeper();

struct Completion {
  std::string text;
  std::int64_t latency_ms = 0;
  bool from_cache = false;
  std::string prompt_hash;
};

/// Talks to one OpenAI-style endpoint: `POST {base_url}/chat/completions`.
/// Transient failures (transport errors, 408, 425, 429, 5xx) are retried
/// up to max_retries times with exponential backoff; other statuses fail at
/// once.
class ChatClient {
 public:
  ChatClient(ModelEndpointConfig cfg, std::shared_ptr<ResponseCache> cache,
             Sleeper sleeper = real_sleeper());

  /// Throws Error("annotate", "EndpointExhausted"), "EndpointRejected" for a
  /// non-retryable status, or "MalformedResponse".
  Completion complete(const prompting::RenderedPrompt& prompt);

  /// Request body sent for a prompt.
  nlohmann::ordered_json request_body(const prompting::RenderedPrompt& prompt) const;

  const ModelEndpointConfig& config() const { return cfg_; }
  std::uint64_t network_calls() const { return network_calls_.load(); }

 private:
  ModelEndpointConfig cfg_;
  std::shared_ptr<ResponseCache> cache_;
  Sleeper sleeper_;
  RateLimiter limiter_;
  std::atomic<std::uint64_t> network_calls_{0};
};

/// Message text of a chat-completion payload; throws
/// Error("annotate", "MalformedResponse").
std::string extract_message_text(std::string_view body);

// ---------------------------------------------------------------------------
// Job

struct JobConfig {
  prompting::PromptSettings settings;
  VotePolicy policy = VotePolicy::kExcludeOnInconclusive;
  double max_failure_ratio = 0.1;
  std::filesystem::path cache_dir;
  prompting::ExampleOrder order = prompting::ExampleOrder::kMostSimilarLast;
  std::vector<std::string> positives = {"BIASED"};
  std::vector<std::string> negatives = {"NOT BIASED"};
};

struct JobStats {
  std::size_t sentences = 0;
  std::size_t labeled = 0;
  std::size_t inconclusive = 0;
  std::size_t ties = 0;
  std::size_t failed = 0;
  std::uint64_t network_calls = 0;
  std::uint64_t cache_hits = 0;
};

struct JobResult {
  std::vector<AnnotationRecord> records;  // by sentence_id, then ensemble order
  std::vector<EnsembleResult> results;    // by sentence_id
  std::vector<SentenceRecord> sentences;  // by sentence_id
  std::vector<std::vector<std::pair<std::string, std::string>>> responses;  // per result
  JobStats stats;
};

/// Renders one prompt per sentence, queries every endpoint, parses and
/// aggregates. Output order never depends on scheduling. Throws
/// Error("annotate", "EvenPanel") and, when more than max_failure_ratio of
/// the sentences fail, Error("annotate", "JobFailed").
JobResult run_annotation_job(const std::vector<SentenceRecord>& sentences,
                             const prompting::ExampleRetriever& retriever,
                             const std::vector<ModelEndpointConfig>& ensemble,
                             const JobConfig& cfg, Sleeper sleeper = real_sleeper());

/// Writes annotations.jsonl, ensemble.jsonl and inconclusive.jsonl.
void write_job_outputs(const JobResult& job, const std::filesystem::path& dir);

std::vector<EnsembleResult> read_ensemble_jsonl(const std::filesystem::path& path);
EnsembleResult ensemble_from_json(const nlohmann::ordered_json& j);

}  // namespace annolex::annotate
