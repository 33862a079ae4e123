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


#include "annolex/checklist.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <unordered_set>

#include "annolex/error.hpp"
#include "annolex/hash.hpp"
#include "annolex/io.hpp"
#include "annolex/rng.hpp"
#include "annolex/text.hpp"

namespace annolex::checklist {

namespace fs = std::filesystem;

std::string_view to_string(TestType t) {
  switch (t) {
    case TestType::kMft: return "MFT";
    case TestType::kInv: return "INV";
    case TestType::kDir: return "DIR";
  }
  return "";
}

std::string_view to_string(Expectation e) {
  switch (e) {
    case Expectation::kPredictEquals: return "PredictEquals";
    case Expectation::kPredictionUnchanged: return "PredictionUnchanged";
    case Expectation::kFlipsToBiased: return "FlipsToBiased";
  }
  return "";
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> kNames = {
      std::string(kMftFactual), std::string(kInvLocations), std::string(kInvPronouns),
      std::string(kInvPrejudice), std::string(kDirLoadedWords)};
  return kNames;
}

nlohmann::ordered_json to_json(const PerturbationCase& c) {
  nlohmann::ordered_json j;
  j["case_id"] = c.case_id;
  j["test_name"] = c.test_name;
  j["test_type"] = std::string(to_string(c.type));
  j["original"] = c.original;
  j["perturbed"] = c.perturbed;
  j["expectation"] = std::string(to_string(c.expectation));
  j["expected_label"] = c.expected_label
                            ? nlohmann::ordered_json(std::string(to_string(*c.expected_label)))
                            : nlohmann::ordered_json(nullptr);
  return j;
}

PerturbationCase case_from_json(const nlohmann::json& j) {
  auto bad = [](const std::string& what) -> Error {
    return Error("checklist", "MalformedCase", what);
  };
  try {
    PerturbationCase c;
    c.case_id = j.at("case_id").get<std::string>();
    c.test_name = j.at("test_name").get<std::string>();
    const auto type = j.at("test_type").get<std::string>();
    if (type == "MFT") c.type = TestType::kMft;
    else if (type == "INV") c.type = TestType::kInv;
    else if (type == "DIR") c.type = TestType::kDir;
    else throw bad("unknown test_type '" + type + "'");
    c.original = j.at("original").get<std::string>();
    c.perturbed = j.at("perturbed").get<std::string>();
    const auto exp = j.at("expectation").get<std::string>();
    if (exp == "PredictEquals") c.expectation = Expectation::kPredictEquals;
    else if (exp == "PredictionUnchanged") c.expectation = Expectation::kPredictionUnchanged;
    else if (exp == "FlipsToBiased") c.expectation = Expectation::kFlipsToBiased;
    else throw bad("unknown expectation '" + exp + "'");
    if (j.contains("expected_label") && !j["expected_label"].is_null()) {
      c.expected_label = parse_bias_label(j["expected_label"].get<std::string>());
      if (!c.expected_label) throw bad("bad expected_label");
    }
    if (c.expectation == Expectation::kPredictEquals && !c.expected_label) {
      throw bad(c.case_id + ": PredictEquals needs expected_label");
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw bad(e.what());
  }
}

std::vector<PerturbationCase> read_cases_jsonl(const fs::path& path) {
  std::vector<PerturbationCase> out;
  for (const auto& j : io::read_jsonl(path)) out.push_back(case_from_json(j));
  return out;
}

namespace {

std::vector<std::string> read_lexicon_lines(const fs::path& path) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& line : text::split(io::read_file(path), '\n')) {
    const std::string item = std::string(text::trim(line));
    if (item.empty() || item.front() == '#') continue;
    if (seen.insert(item).second) out.push_back(item);
  }
  if (out.empty()) throw Error("checklist", "EmptyLexicon", path.string() + " has no entries");
  return out;
}

}  // namespace

Lexicons load_lexicons(const fs::path& dir) {
  Lexicons lex;
  lex.locations = read_lexicon_lines(dir / "locations.txt");
  lex.loaded_adjectives = read_lexicon_lines(dir / "loaded_adjectives.txt");
  lex.loaded_adverbs = read_lexicon_lines(dir / "loaded_adverbs.txt");
  std::set<std::string> seen_terms;
  for (const auto& line : read_lexicon_lines(dir / "minorities.txt")) {
    std::vector<std::string> group;
    for (const auto& raw : text::split(line, '|')) {
      std::string term(text::trim(raw));
      if (term.empty()) continue;
      if (!seen_terms.insert(text::to_lower(term)).second) {
        throw Error("checklist", "MalformedLexicon", "minority term '" + term + "' repeated");
      }
      group.push_back(std::move(term));
    }
    if (group.size() < 2) {
      throw Error("checklist", "MalformedLexicon",
                  "minority group '" + line + "' needs at least two terms");
    }
    lex.minority_groups.push_back(std::move(group));
  }
  return lex;
}

std::vector<std::string> read_sentence_lines(const fs::path& path) {
  std::vector<std::string> out;
  for (const auto& line : text::split(io::read_file(path), '\n')) {
    const std::string_view s = text::trim(line);
    if (s.empty() || s.front() == '#') continue;
    out.emplace_back(s);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

Rng case_rng(std::uint64_t seed, std::string_view suite, std::string_view sentence) {
  return Rng(splitmix64(sub_seed(seed, "checklist." + std::string(suite)) ^ fnv1a64(sentence)));
}

std::string make_case_id(std::string_view suite, std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04zu", index);
  return std::string(suite) + "-" + buf;
}

// Whitespace-delimited token with its punctuation-stripped core.
struct Tok {
  std::size_t begin = 0, end = 0;            // whole token
  std::size_t core_begin = 0, core_end = 0;  // word part, possessive excluded
  bool possessive = false;                   // core followed by 's or ’s
  bool trailing_punct = false;               // punctuation after the core
};

std::vector<Tok> tokenize(std::string_view s) {
  std::vector<Tok> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && text::is_ascii_space(s[i])) ++i;
    if (i >= s.size()) break;
    Tok t;
    t.begin = i;
    while (i < s.size() && !text::is_ascii_space(s[i])) ++i;
    t.end = i;
    std::size_t b = t.begin, e = t.end;
    while (b < e && !text::is_word_byte(s[b]) && s[b] != '$') ++b;
    while (e > b && !text::is_word_byte(s[e - 1]) && s[e - 1] != '.') --e;
    // Keep dots only inside abbreviations like "U.S."; drop a final period.
    if (e > b && s[e - 1] == '.') {
      const std::string_view core = s.substr(b, e - b);
      const bool abbrev = core.find('.') != core.size() - 1;
      if (!abbrev) --e;
    }
    const std::string_view core = s.substr(b, e - b);
    if (core.size() > 2 && (core.ends_with("'s"))) {
      t.possessive = true;
      e -= 2;
    } else if (core.size() > 4 && core.ends_with("\xE2\x80\x99s")) {
      t.possessive = true;
      e -= 4;
    }
    t.core_begin = b;
    t.core_end = e;
    t.trailing_punct = !t.possessive && e < t.end;
    out.push_back(t);
  }
  return out;
}

std::string_view core_of(std::string_view s, const Tok& t) {
  return s.substr(t.core_begin, t.core_end - t.core_begin);
}

struct Match {
  std::size_t begin = 0, end = 0;
  std::size_t term = 0;
};

// Leftmost, then longest, occurrence of any term on word boundaries.
std::optional<Match> find_first_term(std::string_view s, const std::vector<std::string>& terms,
                                     bool ignore_case) {
  std::vector<std::size_t> order(terms.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return terms[a].size() > terms[b].size();
  });
  const std::string hay = ignore_case ? text::to_lower(s) : std::string(s);
  std::vector<std::string> needles;
  for (const auto& t : terms) needles.push_back(ignore_case ? text::to_lower(t) : t);
  for (std::size_t i = 0; i < hay.size(); ++i) {
    if (i > 0 && text::is_word_byte(hay[i - 1])) continue;
    for (std::size_t k : order) {
      const std::string& n = needles[k];
      if (n.empty() || hay.compare(i, n.size(), n) != 0) continue;
      const std::size_t end = i + n.size();
      if (end < hay.size() && text::is_word_byte(hay[end]) && text::is_word_byte(n.back())) continue;
      return Match{i, end, k};
    }
  }
  return std::nullopt;
}

std::string splice(std::string_view s, std::size_t begin, std::size_t end, std::string_view with) {
  std::string out(s.substr(0, begin));
  out += with;
  out += s.substr(end);
  return out;
}

const std::unordered_set<std::string>& honorifics() {
  static const std::unordered_set<std::string> k = {
      "Mr.", "Mrs.", "Ms.", "Dr.", "Sen.", "Rep.", "Gov.", "Prof.", "President", "Senator",
      "Governor", "Representative", "Judge", "Justice", "Secretary", "Minister", "Chancellor",
      "Speaker", "Mayor"};
  return k;
}

// Capitalized words that do not start or belong to a person name.
const std::unordered_set<std::string>& non_name_words() {
  static const std::unordered_set<std::string> k = {
      "The", "A", "An", "This", "That", "These", "Those", "It", "Its", "He", "She", "They",
      "We", "I", "You", "His", "Her", "Their", "Our", "My", "In", "On", "At", "For", "But",
      "And", "Or", "If", "When", "While", "After", "Before", "Despite", "As", "By", "From",
      "With", "Why", "What", "How", "Who", "Where", "Not", "No", "Yes", "So", "Yet", "Then",
      "Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday", "January",
      "February", "March", "April", "May", "June", "July", "August", "September", "October",
      "November", "December", "Court", "House", "Senate", "Congress", "Party", "Department",
      "University", "Republicans", "Democrats", "Republican", "Democratic", "Administration",
      "Committee", "Council", "Union", "News", "Times", "Post", "Street", "Supreme", "White",
      "Federal", "National", "State", "States", "United", "Office", "Ministry", "Agency",
      "Company", "Inc.", "Corp.", "COVID", "EU", "UN", "NATO", "FBI", "CIA", "GOP"};
  return k;
}

bool is_capitalized_name(std::string_view core) {
  return !core.empty() && text::is_ascii_upper(core.front()) &&
         !non_name_words().contains(std::string(core));
}

struct PersonSpan {
  std::size_t begin = 0, end = 0;  // bytes replaced (possessive included)
  bool possessive = false;
  int gender = -1;  // 0 he, 1 she, -1 unknown
};

std::optional<PersonSpan> find_person(std::string_view s, const Lexicons& lex) {
  const auto toks = tokenize(s);
  auto is_gazetteer = [&](std::string_view span) {
    for (const auto& loc : lex.locations) {
      if (span.find(loc) != std::string_view::npos) return true;
    }
    const std::string low = text::to_lower(span);
    for (const auto& g : lex.minority_groups) {
      for (const auto& term : g) {
        if (low == text::to_lower(term)) return true;
      }
    }
    return false;
  };
  for (std::size_t t = 0; t < toks.size(); ++t) {
    const std::string core(core_of(s, toks[t]));
    // The tokenizer drops a final period, so "Mr." arrives as "Mr" + '.'.
    const bool dotted = toks[t].core_end + 1 == toks[t].end && s[toks[t].core_end] == '.';
    const std::string title = dotted ? core + "." : core;
    const bool honorific =
        honorifics().contains(title) && (dotted || !toks[t].trailing_punct);
    std::size_t first = t;
    if (honorific) {
      if (t + 1 >= toks.size() || !is_capitalized_name(core_of(s, toks[t + 1]))) continue;
      first = t + 1;
    } else if (!is_capitalized_name(core) || toks[t].core_begin != toks[t].begin) {
      continue;
    }
    // Extend over consecutive capitalized words; punctuation or a
    // possessive closes the run.
    std::size_t last = first;
    while (!toks[last].possessive && !toks[last].trailing_punct && last + 1 < toks.size() &&
           toks[last + 1].core_begin == toks[last + 1].begin &&
           is_capitalized_name(core_of(s, toks[last + 1]))) {
      ++last;
    }
    const std::size_t words = last - first + 1;
    if (!honorific && words < 2 && !toks[last].possessive) continue;
    PersonSpan p;
    p.begin = toks[t].core_begin;
    p.possessive = toks[last].possessive;
    p.end = p.possessive ? (s.compare(toks[last].core_end, 2, "'s") == 0 ? toks[last].core_end + 2
                                                                        : toks[last].core_end + 4)
                         : toks[last].core_end;
    if (is_gazetteer(s.substr(toks[first].core_begin, toks[last].core_end - toks[first].core_begin))) {
      t = last;
      continue;
    }
    if (honorific) {
      if (title == "Mr.") p.gender = 0;
      if (title == "Mrs." || title == "Ms.") p.gender = 1;
    }
    return p;
  }
  return std::nullopt;
}

std::string capitalize(std::string w) {
  if (!w.empty() && text::is_ascii_lower(w.front())) w.front() = static_cast<char>(w.front() - 32);
  return w;
}

const std::vector<std::string>& primary_aux() {
  static const std::vector<std::string> k = {"has", "have", "had", "is", "are", "was", "were"};
  return k;
}

const std::vector<std::string>& modal_aux() {
  static const std::vector<std::string> k = {"will", "would", "can", "could", "should",
                                             "must", "may", "might", "did", "does", "do"};
  return k;
}

bool is_determiner(std::string_view w) {
  return w == "the" || w == "this" || w == "that" || w == "these" || w == "those";
}

bool is_alpha_word(std::string_view w) {
  return !w.empty() && std::all_of(w.begin(), w.end(), [](char c) { return text::is_ascii_alpha(c); });
}

bool is_numeral(std::string_view w) {
  std::size_t i = 0;
  while (i < w.size() && (w[i] == '$' || w[i] == '#')) ++i;
  if (i < w.size() && text::is_ascii_digit(w[i])) return true;
  // Multi-byte currency signs (euro, pound) followed by a digit.
  return w.size() > 2 && static_cast<unsigned char>(w[0]) >= 0x80 &&
         std::any_of(w.begin(), w.begin() + std::min<std::size_t>(4, w.size()),
                     [](char c) { return text::is_ascii_digit(c); });
}

}  // namespace

std::vector<PerturbationCase> gen_mft_factual(const std::vector<std::string>& sentences) {
  std::vector<PerturbationCase> out;
  for (const auto& s : sentences) {
    PerturbationCase c;
    c.case_id = make_case_id(kMftFactual, out.size());
    c.test_name = std::string(kMftFactual);
    c.type = TestType::kMft;
    c.original = s;
    c.perturbed = s;
    c.expectation = Expectation::kPredictEquals;
    c.expected_label = BiasLabel::kNotBiased;
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<PerturbationCase> gen_inv_substitution(const std::vector<std::string>& sentences,
                                                   LexiconKind kind, const Lexicons& lex,
                                                   std::uint64_t seed) {
  std::string_view suite;
  switch (kind) {
    case LexiconKind::kLocations:
      suite = kInvLocations;
      if (lex.locations.size() < 2) {
        throw Error("checklist", "EmptyLexicon", "locations need at least two entries");
      }
      break;
    case LexiconKind::kPronouns: suite = kInvPronouns; break;
    case LexiconKind::kMinorities:
      suite = kInvPrejudice;
      if (lex.minority_groups.empty()) throw Error("checklist", "EmptyLexicon", "no minority groups");
      break;
  }
  std::vector<std::string> minority_terms;
  std::vector<std::size_t> minority_group_of;
  for (std::size_t g = 0; g < lex.minority_groups.size(); ++g) {
    for (const auto& term : lex.minority_groups[g]) {
      minority_terms.push_back(term);
      minority_group_of.push_back(g);
    }
  }

  std::vector<PerturbationCase> out;
  for (const auto& s : sentences) {
    Rng rng = case_rng(seed, suite, s);
    std::optional<std::string> perturbed;
    if (kind == LexiconKind::kLocations) {
      if (auto m = find_first_term(s, lex.locations, false)) {
        std::vector<std::string> choices;
        for (std::size_t k = 0; k < lex.locations.size(); ++k) {
          if (lex.locations[k] != lex.locations[m->term]) choices.push_back(lex.locations[k]);
        }
        perturbed = splice(s, m->begin, m->end, choices[rng.uniform_index(choices.size())]);
      }
    } else if (kind == LexiconKind::kMinorities) {
      if (auto m = find_first_term(s, minority_terms, true)) {
        const auto& group = lex.minority_groups[minority_group_of[m->term]];
        const std::string matched = text::to_lower(minority_terms[m->term]);
        std::vector<std::string> choices;
        for (const auto& term : group) {
          if (text::to_lower(term) != matched) choices.push_back(term);
        }
        std::string with = choices[rng.uniform_index(choices.size())];
        if (text::is_ascii_upper(s[m->begin])) with = capitalize(with);
        perturbed = splice(s, m->begin, m->end, with);
      }
    } else {
      if (auto p = find_person(s, lex)) {
        static const char* kSubject[] = {"he", "she", "they"};
        static const char* kPossessive[] = {"his", "her", "their"};
        const std::size_t g = p->gender >= 0 ? static_cast<std::size_t>(p->gender)
                                             : static_cast<std::size_t>(rng.uniform_index(3));
        std::string with = p->possessive ? kPossessive[g] : kSubject[g];
        if (p->begin == 0) with = capitalize(with);
        perturbed = splice(s, p->begin, p->end, with);
      }
    }
    if (!perturbed || *perturbed == s) continue;
    PerturbationCase c;
    c.case_id = make_case_id(suite, out.size());
    c.test_name = std::string(suite);
    c.type = TestType::kInv;
    c.original = s;
    c.perturbed = std::move(*perturbed);
    c.expectation = Expectation::kPredictionUnchanged;
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<PerturbationCase> gen_dir_loaded(const std::vector<std::string>& sentences,
                                             const Lexicons& lex, std::uint64_t seed) {
  if (lex.loaded_adjectives.empty() || lex.loaded_adverbs.empty()) {
    throw Error("checklist", "EmptyLexicon", "loaded word lists must not be empty");
  }
  std::vector<PerturbationCase> out;
  for (const auto& s : sentences) {
    const auto toks = tokenize(s);
    std::vector<std::string> low;
    for (const auto& t : toks) low.push_back(text::to_lower(core_of(s, t)));

    // Adverb slot: byte offset and whether the adverb follows the slot word.
    std::optional<std::size_t> adverb_at;
    std::size_t after_tok = 0;
    bool adverb_after_word = true;
    for (const auto* set : {&primary_aux(), &modal_aux()}) {
      for (std::size_t t = 1; t < toks.size() && !adverb_at; ++t) {
        if (!toks[t].trailing_punct &&
            std::find(set->begin(), set->end(), low[t]) != set->end()) {
          adverb_at = toks[t].end;
          after_tok = t + 1;
        }
      }
      if (adverb_at) break;
    }
    if (!adverb_at) {
      for (std::size_t t = 1; t < toks.size(); ++t) {
        if (low[t].size() >= 4 && low[t].ends_with("ed") && is_alpha_word(low[t]) &&
            toks[t].core_begin == toks[t].begin && !is_determiner(low[t - 1])) {
          adverb_at = toks[t].begin;
          after_tok = t;
          adverb_after_word = false;
          break;
        }
      }
    }
    if (!adverb_at) continue;

    std::optional<std::size_t> adjective_at;
    const std::size_t search_from = adverb_after_word ? after_tok : after_tok + 1;
    for (std::size_t t = search_from; t < toks.size(); ++t) {
      if (is_numeral(core_of(s, toks[t]))) {
        adjective_at = toks[t].begin;
        break;
      }
    }
    if (!adjective_at) {
      for (std::size_t t = search_from; t + 1 < toks.size(); ++t) {
        if (is_determiner(low[t]) && !toks[t].trailing_punct && is_alpha_word(low[t + 1]) &&
            toks[t + 1].core_begin == toks[t + 1].begin) {
          adjective_at = toks[t + 1].begin;
          break;
        }
      }
    }
    if (!adjective_at) continue;

    Rng rng = case_rng(seed, kDirLoadedWords, s);
    const std::string& adverb = lex.loaded_adverbs[rng.uniform_index(lex.loaded_adverbs.size())];
    const std::string& adjective =
        lex.loaded_adjectives[rng.uniform_index(lex.loaded_adjectives.size())];
    // The adjective slot always lies after the adverb slot; edit back to front.
    std::string p = splice(s, *adjective_at, *adjective_at, adjective + " ");
    p = adverb_after_word ? splice(p, *adverb_at, *adverb_at, " " + adverb)
                          : splice(p, *adverb_at, *adverb_at, adverb + " ");
    PerturbationCase c;
    c.case_id = make_case_id(kDirLoadedWords, out.size());
    c.test_name = std::string(kDirLoadedWords);
    c.type = TestType::kDir;
    c.original = s;
    c.perturbed = std::move(p);
    c.expectation = Expectation::kFlipsToBiased;
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<PerturbationCase> generate_suite(std::string_view suite,
                                             const std::vector<std::string>& sentences,
                                             const Lexicons& lex, std::uint64_t seed) {
  if (suite == kMftFactual) return gen_mft_factual(sentences);
  if (suite == kInvLocations) return gen_inv_substitution(sentences, LexiconKind::kLocations, lex, seed);
  if (suite == kInvPronouns) return gen_inv_substitution(sentences, LexiconKind::kPronouns, lex, seed);
  if (suite == kInvPrejudice) return gen_inv_substitution(sentences, LexiconKind::kMinorities, lex, seed);
  if (suite == kDirLoadedWords) return gen_dir_loaded(sentences, lex, seed);
  throw Error("checklist", "UnknownSuite", "unknown suite '" + std::string(suite) + "'");
}

// ---------------------------------------------------------------------------

namespace {

// nullopt: the case is filtered out (DIR with a Biased base prediction).
std::optional<bool> case_outcome(const PerturbationCase& c, BiasLabel base,
                                 const std::function<BiasLabel()>& perturbed) {
  switch (c.expectation) {
    case Expectation::kPredictEquals:
      return base == c.expected_label.value_or(BiasLabel::kNotBiased);
    case Expectation::kPredictionUnchanged:
      return perturbed() == base;
    case Expectation::kFlipsToBiased:
      if (base != BiasLabel::kNotBiased) return std::nullopt;
      return perturbed() == BiasLabel::kBiased;
  }
  return false;
}

class Tally {
 public:
  void add(const std::string& name, std::optional<bool> outcome) {
    auto it = std::find_if(report_.suites.begin(), report_.suites.end(),
                           [&](const SuiteScore& x) { return x.test_name == name; });
    if (it == report_.suites.end()) {
      report_.suites.push_back({name, 0, 0, 0.0});
      it = report_.suites.end() - 1;
    }
    if (!outcome) return;
    ++it->cases_total;
    if (*outcome) ++it->cases_passed;
  }
  ChecklistReport finish() {
    for (auto& s : report_.suites) {
      s.pass_rate = s.cases_total == 0 ? 0.0
                                       : static_cast<double>(s.cases_passed) /
                                             static_cast<double>(s.cases_total);
    }
    return std::move(report_);
  }

 private:
  ChecklistReport report_;
};

}  // namespace

ChecklistReport score_suite(const std::vector<PerturbationCase>& cases, const Predictor& predict) {
  Tally tally;
  for (const auto& c : cases) {
    tally.add(c.test_name,
              case_outcome(c, predict(c.original), [&] { return predict(c.perturbed); }));
  }
  return tally.finish();
}

CasePredictions read_case_predictions(const fs::path& path) {
  const io::CsvTable table = io::read_csv(path);
  const std::size_t id_col = table.column("case_id");
  const std::size_t variant_col = table.column("variant");
  const std::size_t label_col = table.column("label");
  CasePredictions out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row[variant_col] != "original" && row[variant_col] != "perturbed") {
      throw Error("checklist", "MalformedPredictions",
                  path.string() + ": row " + std::to_string(r + 1) + ": bad variant");
    }
    auto label = parse_bias_label(row[label_col]);
    if (!label) {
      throw Error("checklist", "MalformedPredictions",
                  path.string() + ": row " + std::to_string(r + 1) + ": bad label");
    }
    out[{row[id_col], row[variant_col]}] = *label;
  }
  return out;
}

ChecklistReport score_with_predictions(const std::vector<PerturbationCase>& cases,
                                       const CasePredictions& preds) {
  auto get = [&](const PerturbationCase& c, const char* variant) {
    auto it = preds.find({c.case_id, variant});
    if (it == preds.end()) {
      throw Error("checklist", "MissingPrediction", c.case_id + "/" + variant);
    }
    return it->second;
  };
  Tally tally;
  for (const auto& c : cases) {
    tally.add(c.test_name, case_outcome(c, get(c, "original"), [&] { return get(c, "perturbed"); }));
  }
  return tally.finish();
}

std::string ChecklistReport::to_text() const {
  std::size_t width = 4;
  for (const auto& s : suites) width = std::max(width, s.test_name.size());
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-*s  %7s  %7s  %9s\n", static_cast<int>(width), "test",
                "passed", "total", "pass_rate");
  out += buf;
  for (const auto& s : suites) {
    std::snprintf(buf, sizeof buf, "%-*s  %7zu  %7zu  %9.3f\n", static_cast<int>(width),
                  s.test_name.c_str(), s.cases_passed, s.cases_total, s.pass_rate);
    out += buf;
  }
  return out;
}

nlohmann::ordered_json ChecklistReport::to_json() const {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& s : suites) {
    nlohmann::ordered_json r;
    r["test_name"] = s.test_name;
    r["cases_total"] = s.cases_total;
    r["cases_passed"] = s.cases_passed;
    r["pass_rate"] = s.pass_rate;
    arr.push_back(std::move(r));
  }
  nlohmann::ordered_json j;
  j["suites"] = std::move(arr);
  return j;
}

}  // namespace annolex::checklist
