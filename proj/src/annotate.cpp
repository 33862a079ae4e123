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

#include "annolex/annotate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <set>
#include <thread>
#include <variant>

#include "annolex/error.hpp"
#include "annolex/hash.hpp"
#include "annolex/http.hpp"
#include "annolex/io.hpp"
#include "annolex/rng.hpp"
#include "annolex/text.hpp"

namespace annolex::annotate {

namespace fs = std::filesystem;

void ModelEndpointConfig::validate() const {
  auto bad = [&](const std::string& what) {
    throw Error("annotate", "InvalidEndpoint", "model '" + name + "': " + what);
  };
  if (name.empty()) bad("empty name");
  if (model_id.empty()) bad("missing model_id");
  http::parse_base_url(base_url);
  if (!(temperature >= 0.0)) bad("temperature must be >= 0");
  if (max_tokens <= 0) bad("max_tokens must be positive");
  if (timeout_ms <= 0) bad("timeout_ms must be positive");
  if (max_retries < 0) bad("max_retries must be >= 0");
  if (requests_per_minute < 0) bad("requests_per_minute must be >= 0");
  if (workers <= 0) bad("workers must be positive");
  if (backoff_base_ms < 0) bad("backoff_base_ms must be >= 0");
  if (backoff_factor < 1.0) bad("backoff_factor must be >= 1");
  if (backoff_jitter < 0.0) bad("backoff_jitter must be >= 0");
}

std::vector<ModelEndpointConfig> load_ensemble(const Config& cfg) {
  std::vector<ModelEndpointConfig> out;
  std::set<std::string> names;
  for (const auto& sec : cfg.sections_with_prefix("model.")) {
    ModelEndpointConfig m;
    m.name = sec.substr(6);
    if (!names.insert(m.name).second) {
      throw Error("annotate", "DuplicateModelName", "model '" + m.name + "' defined twice");
    }
    m.base_url = cfg.require(sec, "base_url");
    m.model_id = cfg.require(sec, "model_id");
    m.temperature = cfg.get_double(sec, "temperature", m.temperature);
    m.max_tokens = static_cast<int>(cfg.get_int(sec, "max_tokens", m.max_tokens));
    m.timeout_ms = static_cast<int>(cfg.get_int(sec, "timeout_ms", m.timeout_ms));
    m.max_retries = static_cast<int>(cfg.get_int(sec, "max_retries", m.max_retries));
    m.requests_per_minute =
        static_cast<int>(cfg.get_int(sec, "requests_per_minute", m.requests_per_minute));
    m.api_key_env = cfg.get_or(sec, "api_key_env", "");
    m.workers = static_cast<int>(cfg.get_int(sec, "workers", m.workers));
    m.backoff_base_ms = static_cast<int>(cfg.get_int(sec, "backoff_base_ms", m.backoff_base_ms));
    m.backoff_factor = cfg.get_double(sec, "backoff_factor", m.backoff_factor);
    m.backoff_jitter = cfg.get_double(sec, "backoff_jitter", m.backoff_jitter);
    m.validate();
    out.push_back(std::move(m));
  }
  return out;
}

std::string_view to_string(ParsedLabel label) {
  switch (label) {
    case ParsedLabel::kBiased: return "BIASED";
    case ParsedLabel::kNotBiased: return "NOT BIASED";
    case ParsedLabel::kInconclusive: return "?";
  }
  return "?";
}

std::optional<ParsedLabel> parse_parsed_label(std::string_view s) {
  if (s == "?") return ParsedLabel::kInconclusive;
  if (auto b = parse_bias_label(s)) {
    return *b == BiasLabel::kBiased ? ParsedLabel::kBiased : ParsedLabel::kNotBiased;
  }
  return std::nullopt;
}

namespace {

struct Phrase {
  std::vector<std::string> words;  // lowercased
  std::size_t length = 0;          // with single separators
  bool positive = false;
};

bool is_separator(char c) { return text::is_ascii_space(c) || c == '-'; }

// End offset of `p` matched at `i`, or npos.
std::size_t match_at(std::string_view raw, std::size_t i, const Phrase& p) {
  std::size_t pos = i;
  for (std::size_t w = 0; w < p.words.size(); ++w) {
    if (w > 0) {
      if (pos >= raw.size() || !is_separator(raw[pos])) return std::string_view::npos;
      while (pos < raw.size() && is_separator(raw[pos])) ++pos;
    }
    const std::string& word = p.words[w];
    if (raw.size() - pos < word.size()) return std::string_view::npos;
    for (std::size_t k = 0; k < word.size(); ++k) {
      if (text::to_lower(raw[pos + k]) != word[k]) return std::string_view::npos;
    }
    pos += word.size();
  }
  const std::string& first = p.words.front();
  const std::string& last = p.words.back();
  if (text::is_word_byte(first.front()) && i > 0 && text::is_word_byte(raw[i - 1])) {
    return std::string_view::npos;
  }
  if (text::is_word_byte(last.back()) && pos < raw.size() && text::is_word_byte(raw[pos])) {
    return std::string_view::npos;
  }
  return pos;
}

}  // namespace

ParsedLabel parse_label(std::string_view raw, const std::vector<std::string>& positives,
                        const std::vector<std::string>& negatives) {
  std::vector<Phrase> phrases;
  auto add = [&](const std::vector<std::string>& list, bool positive) {
    for (const auto& s : list) {
      Phrase p;
      p.positive = positive;
      for (auto w : text::split_whitespace(s)) p.words.push_back(text::to_lower(w));
      if (p.words.empty()) continue;
      for (const auto& w : p.words) p.length += w.size();
      p.length += p.words.size() - 1;
      phrases.push_back(std::move(p));
    }
  };
  add(positives, true);
  add(negatives, false);
  std::stable_sort(phrases.begin(), phrases.end(),
                   [](const Phrase& a, const Phrase& b) { return a.length > b.length; });
  std::size_t pos_count = 0, neg_count = 0;
  std::size_t i = 0;
  while (i < raw.size()) {
    std::size_t end = std::string_view::npos;
    for (const auto& p : phrases) {
      end = match_at(raw, i, p);
      if (end != std::string_view::npos) {
        (p.positive ? pos_count : neg_count) += 1;
        break;
      }
    }
    i = end == std::string_view::npos ? i + 1 : end;
  }
  if (pos_count > neg_count) return ParsedLabel::kBiased;
  if (neg_count > pos_count) return ParsedLabel::kNotBiased;
  return ParsedLabel::kInconclusive;
}

nlohmann::ordered_json to_json(const AnnotationRecord& r) {
  nlohmann::ordered_json j;
  j["sentence_id"] = r.sentence_id;
  j["model_name"] = r.model_name;
  j["prompt_hash"] = r.prompt_hash;
  j["raw_response"] = r.raw_response;
  j["parsed"] = std::string(to_string(r.parsed));
  j["latency_ms"] = r.latency_ms;
  return j;
}

AnnotationRecord annotation_from_json(const nlohmann::json& j) {
  try {
    AnnotationRecord r;
    r.sentence_id = j.at("sentence_id").get<std::string>();
    r.model_name = j.at("model_name").get<std::string>();
    r.prompt_hash = j.at("prompt_hash").get<std::string>();
    r.raw_response = j.at("raw_response").get<std::string>();
    auto parsed = parse_parsed_label(j.at("parsed").get<std::string>());
    if (!parsed) throw Error("annotate", "MalformedRecord", "bad parsed label");
    r.parsed = *parsed;
    r.latency_ms = j.at("latency_ms").get<std::int64_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error("annotate", "MalformedRecord", e.what());
  }
}

std::string_view to_string(VotePolicy p) {
  return p == VotePolicy::kExcludeOnInconclusive ? "exclude-on-inconclusive" : "vote-decisive";
}

VotePolicy parse_vote_policy(std::string_view s) {
  if (s == "exclude-on-inconclusive") return VotePolicy::kExcludeOnInconclusive;
  if (s == "vote-decisive") return VotePolicy::kVoteDecisive;
  throw Error("annotate", "UnknownPolicy", "unknown vote policy '" + std::string(s) + "'");
}

std::string_view to_string(ExcludedReason r) {
  switch (r) {
    case ExcludedReason::kHasInconclusive: return "HasInconclusive";
    case ExcludedReason::kTie: return "Tie";
    case ExcludedReason::kEndpointFailure: return "EndpointFailure";
  }
  return "";
}

nlohmann::ordered_json to_json(const EnsembleResult& r) {
  nlohmann::ordered_json j;
  j["sentence_id"] = r.sentence_id;
  nlohmann::ordered_json votes = nlohmann::ordered_json::object();
  for (const auto& [name, label] : r.votes) votes[name] = std::string(to_string(label));
  j["votes"] = std::move(votes);
  j["final"] = r.final_label ? nlohmann::ordered_json(std::string(to_string(*r.final_label)))
                             : nlohmann::ordered_json(nullptr);
  j["excluded_reason"] = r.excluded_reason
                             ? nlohmann::ordered_json(std::string(to_string(*r.excluded_reason)))
                             : nlohmann::ordered_json(nullptr);
  if (!r.failures.empty()) {
    nlohmann::ordered_json f = nlohmann::ordered_json::object();
    for (const auto& [name, err] : r.failures) f[name] = err;
    j["failures"] = std::move(f);
  }
  return j;
}

EnsembleResult ensemble_from_json(const nlohmann::ordered_json& j) {
  try {
    EnsembleResult r;
    r.sentence_id = j.at("sentence_id").get<std::string>();
    for (const auto& [name, v] : j.at("votes").items()) {
      auto parsed = parse_parsed_label(v.get<std::string>());
      if (!parsed) throw Error("annotate", "MalformedRecord", "bad vote for " + name);
      r.votes.emplace_back(name, *parsed);
    }
    if (!j.at("final").is_null()) {
      auto b = parse_bias_label(j.at("final").get<std::string>());
      if (!b) throw Error("annotate", "MalformedRecord", "bad final label");
      r.final_label = *b;
    }
    if (!j.at("excluded_reason").is_null()) {
      const auto s = j.at("excluded_reason").get<std::string>();
      if (s == "HasInconclusive") r.excluded_reason = ExcludedReason::kHasInconclusive;
      else if (s == "Tie") r.excluded_reason = ExcludedReason::kTie;
      else if (s == "EndpointFailure") r.excluded_reason = ExcludedReason::kEndpointFailure;
      else throw Error("annotate", "MalformedRecord", "bad excluded_reason '" + s + "'");
    }
    if (r.final_label.has_value() == r.excluded_reason.has_value()) {
      throw Error("annotate", "MalformedRecord",
                  "exactly one of final and excluded_reason must be set");
    }
    if (j.contains("failures")) {
      for (const auto& [name, v] : j.at("failures").items()) {
        r.failures.emplace_back(name, v.get<std::string>());
      }
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error("annotate", "MalformedRecord", e.what());
  }
}

std::vector<EnsembleResult> read_ensemble_jsonl(const fs::path& path) {
  std::vector<EnsembleResult> out;
  const std::string content = io::read_file(path);
  std::size_t start = 0;
  while (start < content.size()) {
    auto end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    const std::string_view line = text::trim(std::string_view(content).substr(start, end - start));
    if (!line.empty()) {
      try {
        out.push_back(ensemble_from_json(nlohmann::ordered_json::parse(line)));
      } catch (const nlohmann::json::exception& e) {
        throw Error("annotate", "MalformedRecord", path.string() + ": " + e.what());
      }
    }
    start = end + 1;
  }
  return out;
}

EnsembleResult majority_vote(std::string_view sentence_id,
                             const std::vector<std::pair<std::string, ParsedLabel>>& votes,
                             VotePolicy policy) {
  if (votes.empty() || votes.size() % 2 == 0) {
    throw Error("annotate", "EvenPanel",
                "panel of " + std::to_string(votes.size()) + " cannot form a strict majority");
  }
  std::set<std::string> seen;
  std::size_t biased = 0, not_biased = 0, inconclusive = 0;
  for (const auto& [name, label] : votes) {
    if (!seen.insert(name).second) {
      throw Error("annotate", "DuplicateModelVote", "two votes from '" + name + "'");
    }
    switch (label) {
      case ParsedLabel::kBiased: ++biased; break;
      case ParsedLabel::kNotBiased: ++not_biased; break;
      case ParsedLabel::kInconclusive: ++inconclusive; break;
    }
  }
  EnsembleResult r;
  r.sentence_id = std::string(sentence_id);
  r.votes = votes;
  if (policy == VotePolicy::kExcludeOnInconclusive && inconclusive > 0) {
    r.excluded_reason = ExcludedReason::kHasInconclusive;
  } else if (biased > not_biased) {
    r.final_label = BiasLabel::kBiased;
  } else if (not_biased > biased) {
    r.final_label = BiasLabel::kNotBiased;
  } else {
    r.excluded_reason = ExcludedReason::kTie;
  }
  return r;
}

EnsembleResult majority_vote(const std::vector<AnnotationRecord>& records, VotePolicy policy) {
  if (records.empty()) throw Error("annotate", "EvenPanel", "no votes");
  std::vector<std::pair<std::string, ParsedLabel>> votes;
  for (const auto& r : records) {
    if (r.sentence_id != records.front().sentence_id) {
      throw Error("annotate", "MixedSentences", "records span several sentences");
    }
    votes.emplace_back(r.model_name, r.parsed);
  }
  return majority_vote(records.front().sentence_id, votes, policy);
}

std::string prompt_hash(std::string_view model_id, std::string_view prompt_text,
                        double temperature) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", temperature);
  return content_id({model_id, prompt_text, buf}, 32);
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::ordered_json cache_entry_json(const CacheEntry& e) {
  nlohmann::ordered_json j;
  j["prompt_hash"] = e.prompt_hash;
  j["model_id"] = e.model_id;
  j["request"] = e.request;
  j["response"] = e.response;
  j["latency_ms"] = e.latency_ms;
  return j;
}

}  // namespace

ResponseCache::ResponseCache(const fs::path& dir) : path_(dir / "responses.jsonl") {
  fs::create_directories(dir);
  if (fs::exists(path_)) {
    const std::string content = io::read_file(path_);
    std::size_t start = 0;
    while (start < content.size()) {
      auto end = content.find('\n', start);
      const bool complete = end != std::string::npos;
      if (!complete) end = content.size();
      const std::string_view line = std::string_view(content).substr(start, end - start);
      if (!text::trim(line).empty()) {
        try {
          const auto j = nlohmann::ordered_json::parse(line);
          CacheEntry e;
          e.prompt_hash = j.at("prompt_hash").get<std::string>();
          e.model_id = j.at("model_id").get<std::string>();
          e.request = j.at("request");
          e.response = j.at("response").get<std::string>();
          e.latency_ms = j.at("latency_ms").get<std::int64_t>();
          index_.insert_or_assign(e.prompt_hash, std::move(e));
        } catch (const nlohmann::json::exception& ex) {
          if (complete) {
            throw Error("annotate", "CorruptCache", path_.string() + ": " + ex.what());
          }
        }
      }
      start = end + 1;
    }
    // Drop a torn tail so the next append starts on a fresh line.
    if (!content.empty() && content.back() != '\n') {
      const auto keep = content.rfind('\n');
      fs::resize_file(path_, keep == std::string::npos ? 0 : keep + 1);
    }
  }
  out_.open(path_, std::ios::app | std::ios::binary);
  if (!out_) throw Error("annotate", "CacheUnwritable", "cannot open " + path_.string());
}

std::optional<CacheEntry> ResponseCache::get(const std::string& hash) const {
  std::lock_guard lock(mu_);
  auto it = index_.find(hash);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void ResponseCache::put(const CacheEntry& entry) {
  const std::string line = io::dump_line(cache_entry_json(entry)) + "\n";
  std::lock_guard lock(mu_);
  out_ << line;
  out_.flush();
  if (!out_) throw Error("annotate", "CacheUnwritable", "append failed on " + path_.string());
  index_.insert_or_assign(entry.prompt_hash, entry);
}

std::size_t ResponseCache::size() const {
  std::lock_guard lock(mu_);
  return index_.size();
}

// ---------------------------------------------------------------------------

RateLimiter::RateLimiter(int requests_per_minute)
    : interval_(requests_per_minute > 0
                    ? std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                          std::chrono::duration<double>(60.0 / requests_per_minute))
                    : std::chrono::steady_clock::duration::zero()),
      next_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
  if (interval_ == std::chrono::steady_clock::duration::zero()) return;
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mu_);
    const auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_);
    next_ = slot + interval_;
  }
  std::this_thread::sleep_until(slot);
}

Sleeper real_sleeper() {
  return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::string extract_message_text(std::string_view body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw Error("annotate", "MalformedResponse", std::string("invalid JSON: ") + e.what());
  }
  const auto* choices = j.is_object() && j.contains("choices") ? &j["choices"] : nullptr;
  if (choices == nullptr || !choices->is_array() || choices->empty()) {
    throw Error("annotate", "MalformedResponse", "no choices in payload");
  }
  const auto& first = (*choices)[0];
  if (!first.is_object() || !first.contains("message") || !first["message"].is_object() ||
      !first["message"].contains("content") || !first["message"]["content"].is_string()) {
    throw Error("annotate", "MalformedResponse", "no message text in payload");
  }
  return first["message"]["content"].get<std::string>();
}

ChatClient::ChatClient(ModelEndpointConfig cfg, std::shared_ptr<ResponseCache> cache,
                       Sleeper sleeper)
    : cfg_(std::move(cfg)),
      cache_(std::move(cache)),
      sleeper_(std::move(sleeper)),
      limiter_(cfg_.requests_per_minute) {
  cfg_.validate();
}

nlohmann::ordered_json ChatClient::request_body(const prompting::RenderedPrompt& prompt) const {
  nlohmann::ordered_json messages = nlohmann::ordered_json::array();
  if (prompt.settings.with_system_preamble) {
    messages.push_back({{"role", "system"}, {"content", prompt.system_message()}});
  }
  messages.push_back({{"role", "user"}, {"content", prompt.user_message()}});
  nlohmann::ordered_json body;
  body["model"] = cfg_.model_id;
  body["messages"] = std::move(messages);
  body["temperature"] = cfg_.temperature;
  body["max_tokens"] = cfg_.max_tokens;
  return body;
}

Completion ChatClient::complete(const prompting::RenderedPrompt& prompt) {
  if (prompt.text.empty()) throw Error("annotate", "EmptyPrompt", "prompt is empty");
  Completion c;
  c.prompt_hash = prompt_hash(cfg_.model_id, prompt.text, cfg_.temperature);
  if (auto hit = cache_->get(c.prompt_hash)) {
    c.text = hit->response;
    c.latency_ms = hit->latency_ms;
    c.from_cache = true;
    return c;
  }
  const auto body = request_body(prompt);
  const std::string payload = io::dump_line(body);
  std::vector<std::pair<std::string, std::string>> headers;
  if (!cfg_.api_key_env.empty()) {
    if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key && *key) {
      headers.emplace_back("Authorization", std::string("Bearer ") + key);
    }
  }
  const auto base = http::parse_base_url(cfg_.base_url);
  Rng jitter(fnv1a64(c.prompt_hash) ^ fnv1a64(cfg_.name));
  std::string last_error;
  for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    limiter_.acquire();
    network_calls_.fetch_add(1);
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = http::post_json(base, "/chat/completions", payload, headers, cfg_.timeout_ms);
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - t0);
    if (res.status >= 200 && res.status < 300) {
      c.text = extract_message_text(res.body);
      c.latency_ms = elapsed.count();
      cache_->put({c.prompt_hash, cfg_.model_id, body, c.text, c.latency_ms});
      return c;
    }
    last_error = res.status == 0 ? res.transport_error : "HTTP " + std::to_string(res.status);
    if (!http::is_transient(res)) {
      throw Error("annotate", "EndpointRejected", "model '" + cfg_.name + "': " + last_error);
    }
    if (attempt < cfg_.max_retries) {
      const double delay = cfg_.backoff_base_ms * std::pow(cfg_.backoff_factor, attempt) *
                           (1.0 + cfg_.backoff_jitter * jitter.uniform01());
      sleeper_(std::chrono::milliseconds(static_cast<std::int64_t>(delay)));
    }
  }
  throw Error("annotate", "EndpointExhausted",
              "model '" + cfg_.name + "': " + std::to_string(cfg_.max_retries + 1) +
                  " attempts failed, last: " + last_error);
}

// ---------------------------------------------------------------------------

namespace {

struct Outcome {
  std::optional<Completion> completion;
  std::string error;  // error name when completion is absent
};

}  // namespace

JobResult run_annotation_job(const std::vector<SentenceRecord>& input,
                             const prompting::ExampleRetriever& retriever,
                             const std::vector<ModelEndpointConfig>& ensemble,
                             const JobConfig& cfg, Sleeper sleeper) {
  if (ensemble.empty() || ensemble.size() % 2 == 0) {
    throw Error("annotate", "EvenPanel",
                "ensemble of " + std::to_string(ensemble.size()) + " cannot form a strict majority");
  }
  {
    std::set<std::string> names;
    for (const auto& m : ensemble) {
      if (!names.insert(m.name).second) {
        throw Error("annotate", "DuplicateModelName", "model '" + m.name + "' defined twice");
      }
    }
  }
  JobResult job;
  job.sentences = input;
  std::sort(job.sentences.begin(), job.sentences.end(),
            [](const SentenceRecord& a, const SentenceRecord& b) {
              return a.sentence_id < b.sentence_id;
            });
  for (std::size_t i = 1; i < job.sentences.size(); ++i) {
    if (job.sentences[i].sentence_id == job.sentences[i - 1].sentence_id) {
      throw Error("annotate", "DuplicateSentenceId", job.sentences[i].sentence_id);
    }
  }
  const std::size_t n = job.sentences.size();

  std::vector<prompting::RenderedPrompt> prompts;
  prompts.reserve(n);
  for (const auto& s : job.sentences) {
    prompts.push_back(prompting::build_prompt(s.text, retriever, cfg.settings, cfg.order));
  }

  auto cache = std::make_shared<ResponseCache>(cfg.cache_dir);
  std::vector<std::unique_ptr<ChatClient>> clients;
  for (const auto& m : ensemble) clients.push_back(std::make_unique<ChatClient>(m, cache, sleeper));

  std::vector<std::vector<Outcome>> outcomes(ensemble.size(), std::vector<Outcome>(n));
  std::vector<std::unique_ptr<std::atomic<std::size_t>>> cursors;
  for (std::size_t e = 0; e < ensemble.size(); ++e) {
    cursors.push_back(std::make_unique<std::atomic<std::size_t>>(0));
  }
  std::mutex fatal_mu;
  std::exception_ptr fatal;
  auto worker = [&](std::size_t e) {
    for (;;) {
      const std::size_t i = cursors[e]->fetch_add(1);
      if (i >= n) return;
      try {
        outcomes[e][i].completion = clients[e]->complete(prompts[i]);
      } catch (const Error& err) {
        outcomes[e][i].error = err.name();
      } catch (...) {
        std::lock_guard lock(fatal_mu);
        if (!fatal) fatal = std::current_exception();
        cursors[e]->store(n);
        return;
      }
    }
  };
  {
    std::vector<std::jthread> threads;
    for (std::size_t e = 0; e < ensemble.size(); ++e) {
      const auto w = std::min<std::size_t>(static_cast<std::size_t>(ensemble[e].workers),
                                           std::max<std::size_t>(n, 1));
      for (std::size_t t = 0; t < w; ++t) threads.emplace_back(worker, e);
    }
  }
  if (fatal) std::rethrow_exception(fatal);

  job.stats.sentences = n;
  for (const auto& c : clients) job.stats.network_calls += c->network_calls();
  for (std::size_t i = 0; i < n; ++i) {
    const std::string& sid = job.sentences[i].sentence_id;
    std::vector<std::pair<std::string, ParsedLabel>> votes;
    std::vector<std::pair<std::string, std::string>> failures;
    std::vector<std::pair<std::string, std::string>> responses;
    for (std::size_t e = 0; e < ensemble.size(); ++e) {
      const Outcome& o = outcomes[e][i];
      if (!o.completion) {
        failures.emplace_back(ensemble[e].name, o.error);
        continue;
      }
      if (o.completion->from_cache) ++job.stats.cache_hits;
      const ParsedLabel parsed = parse_label(o.completion->text, cfg.positives, cfg.negatives);
      job.records.push_back({sid, ensemble[e].name, o.completion->prompt_hash,
                             o.completion->text, parsed, o.completion->latency_ms});
      votes.emplace_back(ensemble[e].name, parsed);
      responses.emplace_back(ensemble[e].name, o.completion->text);
    }
    EnsembleResult r;
    if (!failures.empty()) {
      r.sentence_id = sid;
      r.votes = std::move(votes);
      r.excluded_reason = ExcludedReason::kEndpointFailure;
      r.failures = std::move(failures);
      ++job.stats.failed;
    } else {
      r = majority_vote(sid, votes, cfg.policy);
      if (r.final_label) ++job.stats.labeled;
      else if (*r.excluded_reason == ExcludedReason::kTie) ++job.stats.ties;
      else ++job.stats.inconclusive;
    }
    job.results.push_back(std::move(r));
    job.responses.push_back(std::move(responses));
  }
  if (n > 0 && static_cast<double>(job.stats.failed) / static_cast<double>(n) >
                   cfg.max_failure_ratio) {
    throw Error("annotate", "JobFailed",
                std::to_string(job.stats.failed) + " of " + std::to_string(n) +
                    " sentences failed, above max_failure_ratio");
  }
  return job;
}

void write_job_outputs(const JobResult& job, const fs::path& dir) {
  std::vector<nlohmann::ordered_json> records, results, review;
  for (const auto& r : job.records) records.push_back(to_json(r));
  for (std::size_t i = 0; i < job.results.size(); ++i) {
    const auto& r = job.results[i];
    results.push_back(to_json(r));
    if (r.excluded_reason && *r.excluded_reason != ExcludedReason::kEndpointFailure) {
      nlohmann::ordered_json j;
      j["sentence_id"] = r.sentence_id;
      j["text"] = job.sentences[i].text;
      j["excluded_reason"] = std::string(to_string(*r.excluded_reason));
      nlohmann::ordered_json resp = nlohmann::ordered_json::object();
      for (const auto& [name, raw] : job.responses[i]) resp[name] = raw;
      j["responses"] = std::move(resp);
      review.push_back(std::move(j));
    }
  }
  io::write_file_atomic(dir / "annotations.jsonl", io::to_jsonl(records));
  io::write_file_atomic(dir / "ensemble.jsonl", io::to_jsonl(results));
  io::write_file_atomic(dir / "inconclusive.jsonl", io::to_jsonl(review));
}

}  // namespace annolex::annotate
