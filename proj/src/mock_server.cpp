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


#include "annolex/mock_server.hpp"

#include "annolex/error.hpp"
#include "annolex/hash.hpp"
#include "annolex/io.hpp"
#include "annolex/prompting.hpp"
#include "httplib.h"

namespace annolex::mock {

namespace {

[[noreturn]] void malformed(const std::string& what) {
  throw Error("mock", "MalformedScript", what);
}

nlohmann::ordered_json completion_payload(const std::string& model, const std::string& text) {
  nlohmann::ordered_json j;
  j["object"] = "chat.completion";
  j["model"] = model;
  j["choices"] = nlohmann::ordered_json::array(
      {{{"index", 0},
        {"message", {{"role", "assistant"}, {"content", text}}},
        {"finish_reason", "stop"}}});
  return j;
}

Reply error_reply(int status, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = {{"message", message}};
  return {status, io::dump_line(j)};
}

}  // namespace

MockScript::MockScript(const nlohmann::json& script) {
  try {
    if (!script.is_object() || !script.contains("models") || !script["models"].is_object()) {
      malformed("missing 'models' object");
    }
    embedding_dim_ = script.value("embedding_dim", std::size_t{256});
    if (embedding_dim_ == 0) malformed("embedding_dim must be positive");
    for (const auto& [id, spec] : script["models"].items()) {
      Model m;
      if (spec.contains("default")) m.fallback = spec["default"].get<std::string>();
      for (const auto& r : spec.value("rules", nlohmann::json::array())) {
        Rule rule;
        try {
          rule.pattern = std::regex(r.at("pattern").get<std::string>(), std::regex::ECMAScript);
        } catch (const std::regex_error& e) {
          malformed("model '" + id + "': bad pattern: " + e.what());
        }
        const auto scope = r.value("scope", std::string("target"));
        if (scope != "target" && scope != "prompt") malformed("unknown scope '" + scope + "'");
        rule.target_scope = scope == "target";
        rule.response = r.value("response", std::string());
        rule.fail_first = r.value("fail_first", 0);
        rule.status = r.value("status", 503);
        rule.malformed = r.value("malformed", false);
        if (rule.fail_first < 0) malformed("fail_first must be >= 0");
        m.rules.push_back(std::move(rule));
      }
      models_.emplace(id, std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    malformed(e.what());
  }
}

MockScript MockScript::load(const std::filesystem::path& path) {
  try {
    return MockScript(nlohmann::json::parse(io::read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    malformed(path.string() + ": " + e.what());
  }
}

Reply MockScript::chat(const std::string& request_body) {
  nlohmann::json req;
  try {
    req = nlohmann::json::parse(request_body);
  } catch (const nlohmann::json::exception&) {
    return error_reply(400, "invalid JSON");
  }
  if (!req.is_object() || !req.contains("model") || !req["model"].is_string() ||
      !req.contains("messages") || !req["messages"].is_array()) {
    return error_reply(400, "expected model and messages");
  }
  const std::string model_id = req["model"].get<std::string>();
  auto it = models_.find(model_id);
  if (it == models_.end()) return error_reply(404, "unknown model '" + model_id + "'");

  std::string prompt;
  for (const auto& msg : req["messages"]) {
    if (!msg.is_object() || !msg.contains("content") || !msg["content"].is_string()) {
      return error_reply(400, "malformed message");
    }
    if (!prompt.empty()) prompt += '\n';
    prompt += msg["content"].get<std::string>();
  }
  const std::string target = prompting::extract_target(prompt).value_or(prompt);

  const auto& rules = it->second.rules;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    const Rule& rule = rules[i];
    if (!std::regex_search(rule.target_scope ? target : prompt, rule.pattern)) continue;
    if (rule.fail_first > 0) {
      const std::string key = model_id + "#" + std::to_string(i) + "#" + sha256_hex(prompt);
      std::lock_guard lock(*mu_);
      int& served = failures_served_[key];
      if (served < rule.fail_first) {
        ++served;
        return error_reply(rule.status, "scripted failure");
      }
    }
    if (rule.malformed) return {200, R"({"choices":[]})"};
    return {200, io::dump_line(completion_payload(model_id, rule.response))};
  }
  if (!it->second.fallback) return error_reply(400, "no scripted response");
  return {200, io::dump_line(completion_payload(model_id, *it->second.fallback))};
}

Reply MockScript::embeddings(const std::string& request_body) const {
  nlohmann::json req;
  try {
    req = nlohmann::json::parse(request_body);
  } catch (const nlohmann::json::exception&) {
    return error_reply(400, "invalid JSON");
  }
  if (!req.is_object() || !req.contains("input") || !req["input"].is_string()) {
    return error_reply(400, "expected string input");
  }
  try {
    const auto e = prompting::HashingEmbedder(embedding_dim_).embed(req["input"].get<std::string>());
    nlohmann::ordered_json j;
    j["object"] = "list";
    j["data"] = nlohmann::ordered_json::array({{{"index", 0}, {"embedding", e.values}}});
    return {200, io::dump_line(j)};
  } catch (const Error& e) {
    return error_reply(400, e.what());
  }
}

MockServer::MockServer(MockScript script)
    : script_(std::make_unique<MockScript>(std::move(script))),
      server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

MockServer::~MockServer() { stop(); }

void MockServer::install_routes() {
  auto handle = [this](bool chat) {
    return [this, chat](const httplib::Request& req, httplib::Response& res) {
      {
        std::lock_guard lock(mu_);
        ++total_;
        if (chat) {
          try {
            const auto j = nlohmann::json::parse(req.body);
            if (j.contains("model") && j["model"].is_string()) {
              ++per_model_[j["model"].get<std::string>()];
            }
          } catch (const nlohmann::json::exception&) {
          }
        }
      }
      const Reply r = chat ? script_->chat(req.body) : script_->embeddings(req.body);
      res.status = r.status;
      res.set_content(r.body, "application/json");
    };
  };
  for (const char* prefix : {"", "/v1"}) {
    server_->Post(std::string(prefix) + "/chat/completions", handle(true));
    server_->Post(std::string(prefix) + "/embeddings", handle(false));
  }
}

int MockServer::start(const std::string& host, int port) {
  host_ = host;
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
  } else {
    port_ = server_->bind_to_port(host, port) ? port : -1;
  }
  if (port_ <= 0) {
    throw Error("mock", "BindFailed", "cannot bind " + host + ":" + std::to_string(port));
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void MockServer::serve(const std::string& host, int port) {
  host_ = host;
  if (!server_->bind_to_port(host, port)) {
    throw Error("mock", "BindFailed", "cannot bind " + host + ":" + std::to_string(port));
  }
  port_ = port;
  server_->listen_after_bind();
}

void MockServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string MockServer::base_url() const {
  return "http://" + host_ + ":" + std::to_string(port_);
}

std::uint64_t MockServer::request_count() const {
  std::lock_guard lock(mu_);
  return total_;
}

std::uint64_t MockServer::request_count(const std::string& model_id) const {
  std::lock_guard lock(mu_);
  auto it = per_model_.find(model_id);
  return it == per_model_.end() ? 0 : it->second;
}

}  // namespace annolex::mock
