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

#include "annolex/sampling.hpp"

#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "annolex/hash.hpp"
#include "annolex/io.hpp"
#include "annolex/sparse.hpp"
#include "annolex/text.hpp"

namespace annolex::sampling {

namespace {

// Independent stream per (seed, stream id) so strata do not interact.
Rng stream(std::uint64_t seed, std::uint64_t id) {
  return Rng(splitmix64(seed ^ splitmix64(id + 1)));
}

template <typename T, typename KeyFn>
void sort_by_id(std::vector<T>& v, KeyFn key) {
  std::sort(v.begin(), v.end(),
            [&](const T& a, const T& b) { return key(a) < key(b); });
}

// Moves `k` uniformly drawn elements to the front (partial Fisher-Yates).
template <typename T>
void draw_front(std::vector<T>& v, std::size_t k, Rng& rng) {
  for (std::size_t i = 0; i < k && i + 1 < v.size(); ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(v.size() - i));
    std::swap(v[i], v[j]);
  }
}

template <typename T, typename KeyFn>
void check_unique_ids(const std::vector<T>& v, KeyFn key) {
  std::unordered_set<std::string_view> seen;
  for (const auto& x : v) {
    if (!seen.insert(key(x)).second) {
      throw Error("sampling", "DuplicateSentenceId",
                  "sentence_id '" + std::string(key(x)) + "' repeats");
    }
  }
}

constexpr std::string_view kLeaningNames[] = {"Left", "LeanLeft", "Center", "LeanRight",
                                              "Right"};

std::string cell_name(std::size_t cell) {
  return std::string(kLeaningNames[cell / 2]) + "/" +
         std::string(to_string(static_cast<BiasLabel>(cell % 2)));
}

}  // namespace

WeakLabeledSentence make_weak(SentenceRecord s, double score) {
  if (!(score >= 0.0 && score <= 1.0)) {
    throw Error("sampling", "InvalidWeakScore",
                "weak_score for " + s.sentence_id + " outside [0, 1]");
  }
  WeakLabeledSentence w;
  w.weak_label = score >= 0.5 ? BiasLabel::kBiased : BiasLabel::kNotBiased;
  w.weak_score = score;
  w.sentence = std::move(s);
  return w;
}

std::vector<WeakLabeledSentence> join_weak_labels(
    const std::vector<SentenceRecord>& sentences,
    const std::vector<nlohmann::json>& weak_rows) {
  std::unordered_map<std::string, double> scores;
  for (const auto& row : weak_rows) {
    if (!row.contains("sentence_id") || !row["sentence_id"].is_string() ||
        !row.contains("weak_score") || !row["weak_score"].is_number()) {
      throw Error("sampling", "MalformedRecord",
                  "weak-label rows need string sentence_id and numeric weak_score");
    }
    scores[row["sentence_id"].get<std::string>()] = row["weak_score"].get<double>();
  }
  std::vector<WeakLabeledSentence> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) {
    auto it = scores.find(s.sentence_id);
    if (it == scores.end()) {
      throw Error("sampling", "MissingWeakLabel", "no weak label for " + s.sentence_id);
    }
    out.push_back(make_weak(s, it->second));
  }
  return out;
}

std::vector<WeakLabeledSentence> presample_balanced(
    const std::vector<WeakLabeledSentence>& pool, std::optional<std::size_t> quota,
    std::uint64_t seed) {
  auto id = [](const WeakLabeledSentence& w) -> std::string_view {
    return w.sentence.sentence_id;
  };
  check_unique_ids(pool, id);
  std::array<std::vector<WeakLabeledSentence>, 10> cells;
  for (const auto& w : pool) cells[cell_index(w.sentence.leaning, w.weak_label)].push_back(w);

  std::size_t q = 0;
  if (quota) {
    q = *quota;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (cells[c].size() < q) {
        throw Error("sampling", "CellUnderflow",
                    "cell " + cell_name(c) + " has " + std::to_string(cells[c].size()) +
                        " items, requested " + std::to_string(q));
      }
    }
  } else {
    q = cells[0].size();
    for (const auto& c : cells) q = std::min(q, c.size());
  }

  std::vector<WeakLabeledSentence> out;
  out.reserve(q * cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto& cell = cells[c];
    sort_by_id(cell, id);
    Rng rng = stream(seed, c);
    draw_front(cell, q, rng);
    std::move(cell.begin(), cell.begin() + static_cast<std::ptrdiff_t>(q),
              std::back_inserter(out));
  }
  sort_by_id(out, id);
  return out;
}

std::vector<LabeledSentence> postsample_balanced(const std::vector<LabeledSentence>& annotated,
                                                 std::uint64_t seed) {
  auto id = [](const LabeledSentence& s) -> std::string_view {
    return s.sentence.sentence_id;
  };
  check_unique_ids(annotated, id);
  std::array<std::vector<LabeledSentence>, 10> cells;
  for (const auto& s : annotated) cells[cell_index(s.sentence.leaning, s.label)].push_back(s);

  std::vector<LabeledSentence> out;
  for (std::size_t leaning = 0; leaning < 5; ++leaning) {
    auto& not_biased = cells[leaning * 2];
    auto& biased = cells[leaning * 2 + 1];
    const std::size_t keep = std::min(not_biased.size(), biased.size());
    auto& majority = biased.size() > not_biased.size() ? biased : not_biased;
    auto& minority = biased.size() > not_biased.size() ? not_biased : biased;
    sort_by_id(majority, id);
    Rng rng = stream(seed, leaning);
    draw_front(majority, keep, rng);
    std::move(majority.begin(), majority.begin() + static_cast<std::ptrdiff_t>(keep),
              std::back_inserter(out));
    std::move(minority.begin(), minority.end(), std::back_inserter(out));
  }
  sort_by_id(out, id);
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
  }
  return "train";
}

std::optional<Split> parse_split(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "dev") return Split::kDev;
  if (s == "test") return Split::kTest;
  return std::nullopt;
}

namespace {

void validate(const SplitRatios& r) {
  const double parts[] = {r.train, r.dev, r.test};
  for (double p : parts) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error("sampling", "InvalidRatios", "each ratio must lie in [0, 1]");
    }
  }
  if (std::fabs(r.train + r.dev + r.test - 1.0) > 1e-9) {
    throw Error("sampling", "InvalidRatios", "ratios must sum to 1");
  }
}

}  // namespace

SplitRatios parse_ratios(std::string_view s) {
  auto parts = text::split(s, ',');
  if (parts.size() != 3) {
    throw Error("sampling", "InvalidRatios", "expected three comma-separated ratios");
  }
  double v[3];
  for (int i = 0; i < 3; ++i) {
    try {
      std::size_t used = 0;
      std::string p(text::trim(parts[i]));
      v[i] = std::stod(p, &used);
      if (used != p.size()) throw std::invalid_argument(p);
    } catch (const std::logic_error&) {
      throw Error("sampling", "InvalidRatios", "not a number: '" + parts[i] + "'");
    }
  }
  SplitRatios r{v[0], v[1], v[2]};
  validate(r);
  return r;
}

std::array<std::size_t, 3> largest_remainder(std::size_t n, const SplitRatios& r) {
  validate(r);
  constexpr double kEps = 1e-9;
  const double quotas[3] = {static_cast<double>(n) * r.train, static_cast<double>(n) * r.dev,
                            static_cast<double>(n) * r.test};
  std::array<std::size_t, 3> alloc{};
  double rem[3];
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    double f = std::floor(quotas[i] + kEps);
    alloc[i] = static_cast<std::size_t>(f);
    rem[i] = std::max(0.0, quotas[i] - f);
    assigned += alloc[i];
  }
  // Shed any overshoot from float noise from the back.
  for (int i = 2; assigned > n && i >= 0; --i) {
    std::size_t take = std::min(alloc[i], assigned - n);
    alloc[i] -= take;
    assigned -= take;
  }
  int order[3] = {0, 1, 2};
  std::stable_sort(order, order + 3, [&](int a, int b) { return rem[a] > rem[b] + kEps; });
  for (int k = 0; assigned < n; k = (k + 1) % 3) {
    ++alloc[order[k]];
    ++assigned;
  }
  return alloc;
}

std::vector<LabeledSentence> LabeledDataset::subset(Split s) const {
  std::vector<LabeledSentence> out;
  for (const auto& d : items) {
    if (d.split == s) out.push_back(d.item);
  }
  return out;
}

LabeledDataset split_dataset(const std::vector<LabeledSentence>& items,
                             const SplitRatios& ratios, std::uint64_t seed) {
  validate(ratios);
  if (items.empty()) throw Error("sampling", "EmptyDataset", "nothing to split");
  auto id = [](const LabeledSentence& s) -> std::string_view {
    return s.sentence.sentence_id;
  };
  check_unique_ids(items, id);
  std::array<std::vector<LabeledSentence>, 10> strata;
  for (const auto& s : items) strata[cell_index(s.sentence.leaning, s.label)].push_back(s);

  LabeledDataset ds;
  ds.items.reserve(items.size());
  for (std::size_t c = 0; c < strata.size(); ++c) {
    auto& stratum = strata[c];
    if (stratum.empty()) continue;
    sort_by_id(stratum, id);
    Rng rng = stream(seed, c);
    rng.shuffle(stratum);
    auto alloc = largest_remainder(stratum.size(), ratios);
    std::size_t pos = 0;
    for (int s = 0; s < 3; ++s) {
      for (std::size_t k = 0; k < alloc[s]; ++k) {
        ds.items.push_back({std::move(stratum[pos++]), static_cast<Split>(s)});
      }
    }
  }
  std::sort(ds.items.begin(), ds.items.end(), [](const DatasetItem& a, const DatasetItem& b) {
    return a.item.sentence.sentence_id < b.item.sentence.sentence_id;
  });
  return ds;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> csv_fields(const DatasetItem& d) {
  return {d.item.sentence.sentence_id, d.item.sentence.text,
          std::string(annolex::to_string(d.item.sentence.leaning)),
          std::string(annolex::to_string(d.item.label)), std::string(to_string(d.split))};
}

constexpr const char* kCsvHeader = "sentence_id,text,leaning,label,split\n";

}  // namespace

std::string dataset_to_csv(const LabeledDataset& ds) {
  std::string out = kCsvHeader;
  for (const auto& d : ds.items) out += io::csv_line(csv_fields(d));
  return out;
}

std::string dataset_to_csv(const LabeledDataset& ds, Split only) {
  std::string out = kCsvHeader;
  for (const auto& d : ds.items) {
    if (d.split == only) out += io::csv_line(csv_fields(d));
  }
  return out;
}

std::string dataset_to_jsonl(const LabeledDataset& ds) {
  std::string out;
  for (const auto& d : ds.items) {
    nlohmann::ordered_json j;
    j["sentence_id"] = d.item.sentence.sentence_id;
    j["text"] = d.item.sentence.text;
    j["leaning"] = std::string(annolex::to_string(d.item.sentence.leaning));
    j["label"] = std::string(annolex::to_string(d.item.label));
    j["split"] = std::string(to_string(d.split));
    out += io::dump_line(j);
    out += '\n';
  }
  return out;
}

LabeledDataset read_dataset_csv(const std::filesystem::path& path) {
  auto table = io::read_csv(path);
  const std::size_t c_id = table.column("sentence_id");
  const std::size_t c_text = table.column("text");
  const std::size_t c_leaning = table.column("leaning");
  const std::size_t c_label = table.column("label");
  const std::size_t c_split = table.column("split");
  LabeledDataset ds;
  for (const auto& row : table.rows) {
    DatasetItem d;
    d.item.sentence.sentence_id = row[c_id];
    d.item.sentence.text = row[c_text];
    auto l = parse_leaning(row[c_leaning]);
    auto b = parse_bias_label(row[c_label]);
    auto s = parse_split(row[c_split]);
    if (!l || !b || !s) {
      throw Error("sampling", "MalformedRecord",
                  path.string() + ": bad leaning/label/split for " + row[c_id]);
    }
    d.item.sentence.leaning = *l;
    d.item.label = *b;
    d.split = *s;
    ds.items.push_back(std::move(d));
  }
  return ds;
}

nlohmann::ordered_json to_json(const LabeledSentence& s) {
  nlohmann::ordered_json j = annolex::to_json(s.sentence);
  j["label"] = std::string(annolex::to_string(s.label));
  return j;
}

LabeledSentence labeled_from_json(const nlohmann::json& j) {
  LabeledSentence s;
  s.sentence = sentence_from_json(j);
  auto it = j.find("label");
  std::optional<BiasLabel> b;
  if (it != j.end() && it->is_string()) b = parse_bias_label(it->get<std::string>());
  if (!b) throw Error("sampling", "MalformedRecord", "bad label for " + s.sentence.sentence_id);
  s.label = *b;
  return s;
}

nlohmann::ordered_json to_json(const WeakLabeledSentence& s) {
  nlohmann::ordered_json j = annolex::to_json(s.sentence);
  j["weak_score"] = s.weak_score;
  j["weak_label"] = std::string(annolex::to_string(s.weak_label));
  return j;
}

WeakLabeledSentence weak_from_json(const nlohmann::json& j) {
  auto it = j.find("weak_score");
  if (it == j.end() || !it->is_number()) {
    throw Error("sampling", "MalformedRecord", "weak-labeled record lacks weak_score");
  }
  return make_weak(sentence_from_json(j), it->get<double>());
}

std::vector<std::size_t> coreset_select(const std::vector<std::vector<double>>& features,
                                        std::size_t m, std::uint64_t seed) {
  for (const auto& f : features) {
    if (f.size() != features.front().size()) {
      throw Error("sampling", "DimensionMismatch", "feature vectors differ in dimension");
    }
  }
  return coreset_select(features.size(), m, seed, [&](std::size_t i, std::size_t j) {
    return euclidean_distance(std::span<const double>(features[i]),
                              std::span<const double>(features[j]));
  });
}

}  // namespace annolex::sampling
