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
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

namespace httplib {
class Server;
}

// Scripted chat-completion endpoint for tests and offline dry runs.
//
// Script format:
//
//   {"embedding_dim": 256,
//    "models": {"model-id": {
//        "rules": [{"pattern": "regex", "scope": "target" | "prompt",
//                   "response": "text", "fail_first": 0, "status": 503,
//                   "malformed": false}],
//        "default": "text"}}}
//
// The first rule whose pattern matches (regex search) answers. Scope
// "target" matches against the sentence under classification, "prompt"
// against the full prompt. A rule with fail_first = n answers each distinct
// prompt with `status` n times before succeeding; `malformed` replies with a
// payload that has no message text.
namespace annolex::mock {

struct Reply {
  int status = 200;
  std::string body;
};

class MockScript {
 public:
  /// Throws Error("mock", "MalformedScript").
  explicit MockScript(const nlohmann::json& script);
  static MockScript load(const std::filesystem::path& path);

  /// Answers one chat-completion request body. Thread-safe.
  Reply chat(const std::string& request_body);
  /// Answers one embeddings request body. Thread-safe.
  Reply embeddings(const std::string& request_body) const;

 private:
  struct Rule {
    std::regex pattern;
    bool target_scope = true;
    std::string response;
    int fail_first = 0;
    int status = 503;
    bool malformed = false;
  };
  struct Model {
    std::vector<Rule> rules;
    std::optional<std::string> fallback;
  };
  std::map<std::string, Model> models_;
  std::size_t embedding_dim_ = 256;
  std::unique_ptr<std::mutex> mu_ = std::make_unique<std::mutex>();
  std::map<std::string, int> failures_served_;  // rule key + prompt hash -> count
};

/// HTTP front end over a MockScript, bound to 127.0.0.1 by default.
class MockServer {
 public:
  explicit MockServer(MockScript script);
  ~MockServer();
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  /// Binds (port 0 picks a free port) and serves on a background thread.
  /// Returns the bound port. Throws Error("mock", "BindFailed").
  int start(const std::string& host = "127.0.0.1", int port = 0);
  /// Binds and serves on the calling thread until stop().
  void serve(const std::string& host, int port);
  void stop();

  std::string base_url() const;
  std::uint64_t request_count() const;
  std::uint64_t request_count(const std::string& model_id) const;

 private:
  void install_routes();

  std::unique_ptr<MockScript> script_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::string host_;
  int port_ = 0;
  mutable std::mutex mu_;
  std::uint64_t total_ = 0;
  std::map<std::string, std::uint64_t> per_model_;
};

}  // namespace annolex::mock
