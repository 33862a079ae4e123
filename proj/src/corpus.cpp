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

#include "annolex/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <unordered_set>

#include "annolex/error.hpp"
#include "annolex/hash.hpp"
#include "annolex/io.hpp"
#include "annolex/text.hpp"

namespace annolex::corpus {

namespace fs = std::filesystem;

ArticleRecord article_from_json(const nlohmann::json& j) {
  auto str = [&](const char* key) -> std::string {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) {
      throw Error("corpus", "MalformedRecord",
                  std::string("article lacks string key '") + key + "'");
    }
    return it->get<std::string>();
  };
  ArticleRecord a;
  a.article_id = str("article_id");
  a.outlet = str("outlet");
  a.url = str("url");
  a.body = str("body");
  a.allsides_rating = str("allsides_rating");
  auto bias = j.find("adfontes_bias");
  if (bias == j.end() || !bias->is_number()) {
    throw Error("corpus", "MalformedRecord",
                "article " + a.article_id + " lacks numeric 'adfontes_bias'");
  }
  a.adfontes_bias = bias->get<double>();
  if (auto lang = j.find("detected_language"); lang != j.end() && lang->is_string()) {
    a.detected_language = lang->get<std::string>();
  }
  return a;
}

std::vector<ArticleRecord> read_articles(const fs::path& file) {
  std::vector<ArticleRecord> out;
  std::unordered_set<std::string> seen;
  for (const auto& j : io::read_jsonl(file)) {
    ArticleRecord a = article_from_json(j);
    if (!seen.insert(a.article_id).second) {
      throw Error("corpus", "DuplicateArticleId",
                  file.string() + ": article_id '" + a.article_id + "' repeats");
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<ArticleRecord> read_article_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw Error("corpus", "InputNotFound", dir.string() + " is not a directory");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<ArticleRecord> out;
  for (const auto& f : files) {
    auto part = read_articles(f);
    std::move(part.begin(), part.end(), std::back_inserter(out));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::optional<PoliticalLeaning> map_allsides(std::string_view raw) {
  std::string key;
  for (char c : raw) {
    if (c == ' ' || c == '-' || c == '_' || text::is_ascii_space(c)) continue;
    key.push_back(text::to_lower(c));
  }
  if (key == "left") return PoliticalLeaning::kLeft;
  if (key == "leanleft") return PoliticalLeaning::kLeanLeft;
  if (key == "center") return PoliticalLeaning::kCenter;
  if (key == "leanright") return PoliticalLeaning::kLeanRight;
  if (key == "right") return PoliticalLeaning::kRight;
  return std::nullopt;
}

PoliticalLeaning map_adfontes(double bias, const RatingThresholds& t) {
  if (bias <= -t.far) return PoliticalLeaning::kLeft;
  if (bias <= -t.lean) return PoliticalLeaning::kLeanLeft;
  if (bias < t.lean) return PoliticalLeaning::kCenter;
  if (bias < t.far) return PoliticalLeaning::kLeanRight;
  return PoliticalLeaning::kRight;
}

std::optional<PoliticalLeaning> unify_ratings(std::string_view allsides_raw,
                                              double adfontes_bias,
                                              const RatingThresholds& t) {
  if (!std::isfinite(adfontes_bias)) return std::nullopt;
  auto a = map_allsides(allsides_raw);
  if (!a) return std::nullopt;
  auto b = map_adfontes(adfontes_bias, t);
  if (*a != b) return std::nullopt;
  return a;
}

// ---------------------------------------------------------------------------

namespace {

const std::unordered_set<std::string_view>& english_stopwords() {
  static const std::unordered_set<std::string_view> kWords = {
      "a",     "about", "after", "all",   "also",  "an",    "and",   "any",
      "are",   "as",    "at",    "be",    "been",  "before", "but",  "by",
      "can",   "could", "did",   "do",    "does",  "for",   "from",  "had",
      "has",   "have",  "he",    "her",   "here",  "him",   "his",   "how",
      "i",     "if",    "in",    "into",  "is",    "it",    "its",   "just",
      "more",  "most",  "my",    "no",    "not",   "now",   "of",    "on",
      "one",   "only",  "or",    "other", "our",   "out",   "over",  "said",
      "she",   "so",    "some",  "than",  "that",  "the",   "their", "them",
      "then",  "there", "these", "they",  "this",  "those", "to",    "up",
      "us",    "was",   "we",    "were",  "what",  "when",  "where", "which",
      "while", "who",   "will",  "with",  "would", "you",   "your"};
  return kWords;
}

}  // namespace

double StopwordLanguageDetector::stopword_ratio(std::string_view text) {
  auto tokens = text::word_tokens(text);
  if (tokens.empty()) return 0.0;
  const auto& stop = english_stopwords();
  std::size_t hits = 0;
  for (const auto& t : tokens) hits += stop.count(t);
  return static_cast<double>(hits) / static_cast<double>(tokens.size());
}

std::string StopwordLanguageDetector::detect(std::string_view text) const {
  return stopword_ratio(text) >= threshold_ ? "en" : "und";
}

double printable_ratio(std::string_view text) {
  std::size_t total = 0;
  std::size_t printable = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::uint32_t cp = text::decode_utf8(text, pos);
    ++total;
    bool ws = cp == '\t' || cp == '\n' || cp == '\r';
    if (cp != 0xfffd && (ws || !text::is_control_cp(cp))) ++printable;
  }
  return total == 0 ? 0.0 : static_cast<double>(printable) / static_cast<double>(total);
}

bool filter_article(const ArticleRecord& a, const FilterConfig& cfg,
                    const LanguageDetector& detector) {
  if (a.body.empty() || a.body.size() < cfg.min_article_chars) return false;
  if (printable_ratio(a.body) < cfg.min_printable_ratio) return false;
  std::string lang = a.detected_language ? text::to_lower(*a.detected_language)
                                         : detector.detect(a.body);
  return lang == "en";
}

bool filter_article(const ArticleRecord& a, const FilterConfig& cfg) {
  static const StopwordLanguageDetector kDefault;
  return filter_article(a, cfg, kDefault);
}

// ---------------------------------------------------------------------------

const std::set<std::string, std::less<>>& default_abbreviations() {
  static const std::set<std::string, std::less<>> kAbbrev = {
      "mr.",   "mrs.",  "ms.",   "dr.",    "prof.", "sr.",   "jr.",  "st.",
      "mt.",   "ft.",   "gen.",  "sen.",   "rep.",  "gov.",  "lt.",  "col.",
      "sgt.",  "capt.", "cmdr.", "adm.",   "rev.",  "hon.",  "pres.", "supt.",
      "vs.",   "v.",    "inc.",  "corp.",  "co.",   "ltd.",  "no.",  "nos.",
      "vol.",  "fig.",  "approx.", "dept.", "est.", "jan.",  "feb.", "apr.",
      "jun.",  "jul.",  "aug.",  "sep.",   "sept.", "oct.",  "nov.", "dec.",
      "u.s.",  "u.k.",  "u.n.",  "e.u.",   "e.g.",  "i.e.",  "d.c.", "no.",
      "ph.d.", "st.",   "ave.",  "blvd.",  "rd."};
  return kAbbrev;
}

namespace {

bool starts_with_at(std::string_view s, std::size_t i, std::string_view pat) {
  return s.substr(i, pat.size()) == pat;
}

constexpr std::string_view kEllipsis = "\xE2\x80\xA6";
constexpr std::string_view kRightDoubleQuote = "\xE2\x80\x9D";
constexpr std::string_view kRightSingleQuote = "\xE2\x80\x99";

// Length of a terminator at i (0 if none).
std::size_t terminator_len(std::string_view s, std::size_t i) {
  char c = s[i];
  if (c == '.' || c == '!' || c == '?') return 1;
  if (starts_with_at(s, i, kEllipsis)) return kEllipsis.size();
  return 0;
}

// Length of a closing quote/bracket at i (0 if none).
std::size_t closer_len(std::string_view s, std::size_t i) {
  char c = s[i];
  if (c == '"' || c == '\'' || c == ')' || c == ']') return 1;
  if (starts_with_at(s, i, kRightDoubleQuote)) return kRightDoubleQuote.size();
  if (starts_with_at(s, i, kRightSingleQuote)) return kRightSingleQuote.size();
  return 0;
}

bool ends_with_abbreviation(std::string_view s, std::size_t word_end) {
  // s[word_end] == '.'; the word runs back to the previous space.
  std::size_t b = word_end;
  while (b > 0 && s[b - 1] != ' ') --b;
  std::string_view word = s.substr(b, word_end + 1 - b);
  while (!word.empty() && !text::is_word_byte(word.front())) word.remove_prefix(1);
  if (word.size() == 2 && text::is_ascii_upper(word[0])) return true;  // "J."
  std::string lower = text::to_lower(word);
  return default_abbreviations().count(lower) > 0;
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view raw) {
  const std::string s = text::collapse_whitespace(raw);
  std::vector<std::string> out;
  std::size_t start = 0;
  int depth = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (c == '(' || c == '[') {
      ++depth;
      ++i;
      continue;
    }
    if (c == ')' || c == ']') {
      depth = std::max(0, depth - 1);
      ++i;
      continue;
    }
    std::size_t tl = terminator_len(s, i);
    if (tl == 0) {
      ++i;
      continue;
    }
    const std::size_t run_begin = i;
    std::size_t j = i;
    while (j < s.size() && (tl = terminator_len(s, j)) > 0) j += tl;
    const bool single_period = (j - run_begin == 1 && s[run_begin] == '.');
    std::size_t k = j;
    int closing_depth = depth;
    while (k < s.size()) {
      std::size_t cl = closer_len(s, k);
      if (cl == 0) break;
      if (s[k] == ')' || s[k] == ']') closing_depth = std::max(0, closing_depth - 1);
      k += cl;
    }
    bool boundary = (k == s.size() || s[k] == ' ');
    if (boundary && closing_depth > 0) boundary = false;
    if (boundary && single_period && k == j && ends_with_abbreviation(s, run_begin)) {
      boundary = false;
    }
    if (boundary && k < s.size() && k + 1 < s.size() && text::is_ascii_lower(s[k + 1])) {
      boundary = false;
    }
    if (!boundary) {
      i = j;
      continue;
    }
    depth = closing_depth;
    out.emplace_back(s.substr(start, k - start));
    start = k + 1;
    i = start;
  }
  if (start < s.size()) out.emplace_back(s.substr(start));
  return out;
}

std::string sentence_id(std::string_view article_id, std::size_t ordinal) {
  return content_id({article_id, std::to_string(ordinal)});
}

std::vector<SentenceRecord> segment_sentences(const ArticleRecord& a,
                                              PoliticalLeaning leaning) {
  std::vector<SentenceRecord> out;
  auto parts = split_sentences(a.body);
  out.reserve(parts.size());
  for (std::size_t ord = 0; ord < parts.size(); ++ord) {
    SentenceRecord r;
    r.sentence_id = sentence_id(a.article_id, ord);
    r.text = std::move(parts[ord]);
    r.leaning = leaning;
    r.outlet = a.outlet;
    r.article_id = a.article_id;
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

bool is_unicode_space(std::uint32_t cp) {
  return cp == 0xa0 || (cp >= 0x2000 && cp <= 0x200a) || cp == 0x2028 ||
         cp == 0x2029 || cp == 0x202f || cp == 0x205f || cp == 0x3000 ||
         cp == 0x1680 || cp == 0x85;
}

bool is_zero_width(std::uint32_t cp) {
  return (cp >= 0x200b && cp <= 0x200d) || cp == 0x2060 || cp == 0xfeff ||
         cp == 0xad;
}

// Bullets, rules and markup debris that only ever appear at the edges of
// scraped lines.
bool is_edge_junk(std::uint32_t cp) {
  switch (cp) {
    case '*': case '#': case '|': case '~': case '^': case '_': case '=':
    case '>': case '<': case 0x2022: case 0x00b7: case 0x25aa: case 0x25ba:
    case 0x25a0: case 0x25c6: case 0x2023: case 0x25cf:
      return true;
    default:
      return false;
  }
}

std::string strip_edges(std::string s, const CleanConfig& cfg) {
  bool changed = true;
  while (changed && !s.empty()) {
    changed = false;
    std::string_view v = text::trim(s);
    if (v.size() != s.size()) {
      s = std::string(v);
      changed = true;
    }
    if (s.empty()) break;
    // Leading junk code point.
    std::size_t pos = 0;
    std::uint32_t first = text::decode_utf8(s, pos);
    if (is_edge_junk(first)) {
      s.erase(0, pos);
      changed = true;
      continue;
    }
    // Trailing junk code point: step back to the start of the last one.
    std::size_t last = s.size() - 1;
    while (last > 0 && (static_cast<unsigned char>(s[last]) & 0xc0) == 0x80) --last;
    std::size_t p2 = last;
    if (is_edge_junk(text::decode_utf8(s, p2))) {
      s.erase(last);
      changed = true;
      continue;
    }
    for (const auto& pre : cfg.junk_prefixes) {
      if (!pre.empty() && s.starts_with(pre)) {
        s.erase(0, pre.size());
        changed = true;
        break;
      }
    }
    if (changed) continue;
    for (const auto& suf : cfg.junk_suffixes) {
      if (!suf.empty() && s.size() > suf.size() && s.ends_with(suf)) {
        s.erase(s.size() - suf.size());
        changed = true;
        break;
      }
    }
  }
  return s;
}

}  // namespace

std::optional<std::string> clean_sentence(std::string_view input, const CleanConfig& cfg) {
  std::string normalized;
  normalized.reserve(input.size());
  std::size_t pos = 0;
  while (pos < input.size()) {
    std::uint32_t cp = text::decode_utf8(input, pos);
    if (cp == '\t' || cp == '\n' || cp == '\r' || is_unicode_space(cp)) {
      normalized.push_back(' ');
    } else if (cp == 0xfffd || text::is_control_cp(cp) || is_zero_width(cp)) {
      continue;
    } else {
      text::append_utf8(normalized, cp);
    }
  }
  std::string cleaned = strip_edges(text::collapse_whitespace(normalized), cfg);
  if (cleaned.empty()) return std::nullopt;
  const std::size_t tokens = text::split_whitespace(cleaned).size();
  if (tokens < cfg.min_tokens || tokens > cfg.max_tokens) return std::nullopt;
  return cleaned;
}

// ---------------------------------------------------------------------------

CorpusConfig CorpusConfig::from_config(const Config& c) {
  CorpusConfig cfg;
  const std::string_view sec = "corpus";
  cfg.thresholds.lean = c.get_double(sec, "adfontes_lean_threshold", cfg.thresholds.lean);
  cfg.thresholds.far = c.get_double(sec, "adfontes_far_threshold", cfg.thresholds.far);
  cfg.filter.min_article_chars = static_cast<std::size_t>(
      c.get_int(sec, "min_article_chars", static_cast<std::int64_t>(cfg.filter.min_article_chars)));
  cfg.filter.min_printable_ratio =
      c.get_double(sec, "min_printable_ratio", cfg.filter.min_printable_ratio);
  cfg.clean.min_tokens = static_cast<std::size_t>(
      c.get_int(sec, "min_tokens", static_cast<std::int64_t>(cfg.clean.min_tokens)));
  cfg.clean.max_tokens = static_cast<std::size_t>(
      c.get_int(sec, "max_tokens", static_cast<std::int64_t>(cfg.clean.max_tokens)));
  if (auto v = c.get(sec, "junk_prefixes")) cfg.clean.junk_prefixes = text::split(*v, '|');
  if (auto v = c.get(sec, "junk_suffixes")) cfg.clean.junk_suffixes = text::split(*v, '|');
  double ratio = c.get_double(sec, "english_stopword_ratio", 0.12);
  cfg.detector = std::make_shared<StopwordLanguageDetector>(ratio);
  if (cfg.thresholds.lean <= 0 || cfg.thresholds.far <= cfg.thresholds.lean) {
    throw Error("config", "BadValue",
                "[corpus] requires 0 < adfontes_lean_threshold < adfontes_far_threshold");
  }
  if (cfg.clean.min_tokens > cfg.clean.max_tokens) {
    throw Error("config", "BadValue", "[corpus] min_tokens exceeds max_tokens");
  }
  return cfg;
}

std::vector<SentenceRecord> build_corpus(const std::vector<ArticleRecord>& articles,
                                         const CorpusConfig& cfg, CorpusStats* stats) {
  CorpusStats st;
  struct Keyed {
    std::string article_id;
    std::size_t ordinal;
    SentenceRecord record;
  };
  std::vector<Keyed> keyed;
  for (const auto& a : articles) {
    ++st.articles;
    auto leaning = unify_ratings(a.allsides_rating, a.adfontes_bias, cfg.thresholds);
    if (!leaning) {
      ++st.rating_disagreements;
      continue;
    }
    if (!filter_article(a, cfg.filter, *cfg.detector)) {
      ++st.filtered_out;
      continue;
    }
    auto segments = segment_sentences(a, *leaning);
    st.segments += segments.size();
    for (std::size_t ord = 0; ord < segments.size(); ++ord) {
      auto cleaned = clean_sentence(segments[ord].text, cfg.clean);
      if (!cleaned) {
        ++st.dropped_by_cleaning;
        continue;
      }
      segments[ord].text = std::move(*cleaned);
      keyed.push_back({a.article_id, ord, std::move(segments[ord])});
    }
  }
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& x, const Keyed& y) {
    return std::tie(x.article_id, x.ordinal) < std::tie(y.article_id, y.ordinal);
  });
  std::vector<SentenceRecord> out;
  out.reserve(keyed.size());
  for (auto& k : keyed) out.push_back(std::move(k.record));
  st.sentences = out.size();
  if (stats) *stats = st;
  return out;
}

std::vector<SentenceRecord> read_sentences(const fs::path& file) {
  std::vector<SentenceRecord> out;
  for (const auto& j : io::read_jsonl(file)) out.push_back(sentence_from_json(j));
  return out;
}

std::string sentences_to_jsonl(const std::vector<SentenceRecord>& sentences) {
  std::string out;
  for (const auto& s : sentences) {
    out += io::dump_line(to_json(s));
    out += '\n';
  }
  return out;
}

}  // namespace annolex::corpus
