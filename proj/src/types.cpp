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

#include "annolex/types.hpp"

#include "annolex/error.hpp"
#include "annolex/text.hpp"

namespace annolex {

std::string_view to_string(PoliticalLeaning leaning) {
  switch (leaning) {
    case PoliticalLeaning::kLeft: return "Left";
    case PoliticalLeaning::kLeanLeft: return "LeanLeft";
    case PoliticalLeaning::kCenter: return "Center";
    case PoliticalLeaning::kLeanRight: return "LeanRight";
    case PoliticalLeaning::kRight: return "Right";
  }
  return "Center";
}

std::optional<PoliticalLeaning> parse_leaning(std::string_view s) {
  for (auto l : kAllLeanings) {
    if (to_string(l) == s) return l;
  }
  return std::nullopt;
}

PoliticalLeaning mirror(PoliticalLeaning leaning) {
  return static_cast<PoliticalLeaning>(4 - static_cast<int>(leaning));
}

std::string_view to_string(BiasLabel label) {
  return label == BiasLabel::kBiased ? "BIASED" : "NOT BIASED";
}

std::optional<BiasLabel> parse_bias_label(std::string_view s) {
  std::string v = text::to_lower(text::trim(s));
  if (v == "biased" || v == "1" || v == "true") return BiasLabel::kBiased;
  if (v == "not biased" || v == "0" || v == "false") return BiasLabel::kNotBiased;
  return std::nullopt;
}

nlohmann::ordered_json to_json(const SentenceRecord& s) {
  nlohmann::ordered_json j;
  j["sentence_id"] = s.sentence_id;
  j["text"] = s.text;
  j["leaning"] = std::string(to_string(s.leaning));
  j["outlet"] = s.outlet;
  j["article_id"] = s.article_id;
  return j;
}

SentenceRecord sentence_from_json(const nlohmann::json& j) {
  auto str = [&](const char* key) -> std::string {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) {
      throw Error("corpus", "MalformedRecord",
                  std::string("sentence record lacks string key '") + key + "'");
    }
    return it->get<std::string>();
  };
  SentenceRecord s;
  s.sentence_id = str("sentence_id");
  s.text = str("text");
  std::string leaning = str("leaning");
  auto l = parse_leaning(leaning);
  if (!l) throw Error("corpus", "MalformedRecord", "unknown leaning '" + leaning + "'");
  s.leaning = *l;
  s.outlet = j.contains("outlet") ? str("outlet") : std::string();
  s.article_id = j.contains("article_id") ? str("article_id") : std::string();
  return s;
}

}  // namespace annolex
