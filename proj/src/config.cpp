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

#include "annolex/config.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "annolex/error.hpp"
#include "annolex/io.hpp"
#include "annolex/text.hpp"

namespace annolex {

namespace pt = boost::property_tree;

Config Config::load(const std::filesystem::path& path) {
  try {
    return parse(io::read_file(path));
  } catch (const Error& e) {
    if (e.module() != "config") throw;
    throw Error("config", e.name(), path.string() + ": " + e.what());
  }
}

Config Config::parse(std::string_view content) {
  pt::ptree tree;
  std::istringstream in{std::string(content)};
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error("config", "ParseError", e.what());
  }
  Config cfg;
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      cfg.set("", name, node.data());
      continue;
    }
    if (std::find(cfg.order_.begin(), cfg.order_.end(), name) == cfg.order_.end()) {
      cfg.order_.push_back(name);
    }
    auto& sec = cfg.sections_[name];
    for (const auto& [key, leaf] : node) sec[key] = leaf.data();
  }
  return cfg;
}

bool Config::has(std::string_view section, std::string_view key) const {
  return get(section, key).has_value();
}

std::optional<std::string> Config::get(std::string_view section,
                                       std::string_view key) const {
  auto s = sections_.find(section);
  if (s == sections_.end()) return std::nullopt;
  auto k = s->second.find(std::string(key));
  if (k == s->second.end()) return std::nullopt;
  return k->second;
}

std::string Config::get_or(std::string_view section, std::string_view key,
                           std::string_view fallback) const {
  auto v = get(section, key);
  return v ? *v : std::string(fallback);
}

std::string Config::require(std::string_view section, std::string_view key) const {
  auto v = get(section, key);
  if (!v) {
    throw Error("config", "MissingKey",
                "missing [" + std::string(section) + "] " + std::string(key));
  }
  return *v;
}

namespace {

[[noreturn]] void bad_value(std::string_view section, std::string_view key,
                            const std::string& value) {
  throw Error("config", "BadValue",
              "[" + std::string(section) + "] " + std::string(key) + " = '" + value + "'");
}

}  // namespace

std::int64_t Config::get_int(std::string_view section, std::string_view key,
                             std::int64_t fallback) const {
  auto v = get(section, key);
  if (!v) return fallback;
  std::int64_t out = 0;
  auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || p != v->data() + v->size()) bad_value(section, key, *v);
  return out;
}

double Config::get_double(std::string_view section, std::string_view key,
                          double fallback) const {
  auto v = get(section, key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    double out = std::stod(*v, &used);
    if (used != v->size()) bad_value(section, key, *v);
    return out;
  } catch (const std::logic_error&) {
    bad_value(section, key, *v);
  }
}

bool Config::get_bool(std::string_view section, std::string_view key,
                      bool fallback) const {
  auto v = get(section, key);
  if (!v) return fallback;
  std::string s = text::to_lower(*v);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  bad_value(section, key, *v);
}

void Config::set(std::string_view section, std::string_view key, std::string value) {
  std::string name(section);
  if (!name.empty() &&
      std::find(order_.begin(), order_.end(), name) == order_.end()) {
    order_.push_back(name);
  }
  sections_[name][std::string(key)] = std::move(value);
}

std::vector<std::string> Config::sections_with_prefix(std::string_view prefix) const {
  std::vector<std::string> out;
  for (const auto& name : order_) {
    if (name.starts_with(prefix)) out.push_back(name);
  }
  return out;
}

const std::map<std::string, std::string>* Config::section(std::string_view name) const {
  auto s = sections_.find(name);
  return s == sections_.end() ? nullptr : &s->second;
}

nlohmann::ordered_json Config::snapshot() const {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  if (auto root = section(""); root != nullptr) {
    for (const auto& [k, v] : *root) out[k] = v;
  }
  for (const auto& name : order_) {
    nlohmann::ordered_json sec = nlohmann::ordered_json::object();
    for (const auto& [k, v] : sections_.find(name)->second) sec[k] = v;
    out[name] = std::move(sec);
  }
  return out;
}

}  // namespace annolex
