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


#include "annolex/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <set>

#include "annolex/error.hpp"
#include "annolex/hash.hpp"
#include "annolex/io.hpp"
#include "annolex/rng.hpp"
#include "annolex/text.hpp"

namespace annolex::baseline {

Vocabulary Vocabulary::build(const std::vector<std::string>& texts, std::size_t min_df) {
  std::map<std::string, std::size_t, std::less<>> df;
  for (const auto& t : texts) {
    auto toks = text::word_tokens(t);
    std::sort(toks.begin(), toks.end());
    toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
    for (auto& tok : toks) ++df[tok];
  }
  std::vector<std::string> kept;
  for (const auto& [tok, n] : df) {
    if (n >= min_df) kept.push_back(tok);
  }
  return from_tokens(std::move(kept), min_df);
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens, std::size_t min_df) {
  Vocabulary v;
  std::sort(tokens.begin(), tokens.end());
  if (std::adjacent_find(tokens.begin(), tokens.end()) != tokens.end()) {
    throw Error("baseline", "MalformedWeights", "duplicate vocabulary token");
  }
  v.tokens_ = std::move(tokens);
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
    v.index_.emplace(v.tokens_[i], static_cast<std::uint32_t>(i));
  }
  v.min_df_ = min_df;
  return v;
}

std::optional<std::uint32_t> Vocabulary::index_of(std::string_view token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

SparseVector featurize(std::string_view t, const Vocabulary& vocab) {
  std::map<std::uint32_t, double> counts;
  for (const auto& tok : text::word_tokens(t)) {
    if (auto idx = vocab.index_of(tok)) counts[*idx] += 1.0;
  }
  SparseVector out(counts.begin(), counts.end());
  double norm = 0.0;
  for (const auto& [i, v] : out) norm += v * v;
  norm = std::sqrt(norm);
  for (auto& [i, v] : out) v /= norm;
  return out;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logit(const ModelWeights& m, const SparseVector& x) { return dot(x, m.w) + m.b; }

double predict_proba(const ModelWeights& m, const SparseVector& x) { return sigmoid(logit(m, x)); }

BiasLabel predict_label(const ModelWeights& m, const SparseVector& x) {
  return predict_proba(m, x) >= 0.5 ? BiasLabel::kBiased : BiasLabel::kNotBiased;
}

std::pair<double, BiasLabel> predict(const Model& model, std::string_view text) {
  const double p = predict_proba(model.weights, featurize(text, model.vocab));
  return {p, p >= 0.5 ? BiasLabel::kBiased : BiasLabel::kNotBiased};
}

namespace {

// log(1 + exp(z)) without overflow.
long double softplus(long double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double target(BiasLabel y) { return y == BiasLabel::kBiased ? 1.0 : 0.0; }

void check_shapes(const ModelWeights& m, const std::vector<SparseVector>& x,
                  const std::vector<BiasLabel>& y) {
  if (x.size() != y.size()) {
    throw Error("baseline", "LengthMismatch", "features and labels differ in length");
  }
  for (const auto& row : x) {
    for (const auto& [i, v] : row) {
      if (i >= m.w.size()) throw Error("baseline", "DimensionMismatch", "feature index out of range");
    }
  }
}

}  // namespace

double loss(const ModelWeights& m, const std::vector<SparseVector>& x,
            const std::vector<BiasLabel>& y, double l2_lambda) {
  check_shapes(m, x, y);
  long double total = 0.0L;
  for (std::size_t i = 0; i < x.size(); ++i) {
    long double z = m.b;
    for (const auto& [j, v] : x[i]) z += static_cast<long double>(v) * m.w[j];
    // BCE(y, sigmoid(z)) = softplus(z) - y z
    total += softplus(z) - target(y[i]) * z;
  }
  long double reg = 0.0L;
  for (double wi : m.w) reg += static_cast<long double>(wi) * wi;
  const long double mean = x.empty() ? 0.0L : total / static_cast<long double>(x.size());
  return static_cast<double>(mean + 0.5L * l2_lambda * reg);
}

Gradient loss_gradient(const ModelWeights& m, const std::vector<SparseVector>& x,
                       const std::vector<BiasLabel>& y, double l2_lambda) {
  check_shapes(m, x, y);
  Gradient g;
  g.w.assign(m.w.size(), 0.0);
  const double inv_n = x.empty() ? 0.0 : 1.0 / static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = (predict_proba(m, x[i]) - target(y[i])) * inv_n;
    g.b += r;
    for (const auto& [j, v] : x[i]) g.w[j] += r * v;
  }
  for (std::size_t j = 0; j < m.w.size(); ++j) g.w[j] += l2_lambda * m.w[j];
  return g;
}

TrainResult train_features(const std::vector<SparseVector>& x, const std::vector<BiasLabel>& y,
                           std::size_t dim, const TrainConfig& cfg) {
  if (x.empty()) throw Error("baseline", "EmptyTrainingSet", "no training examples");
  if (cfg.epochs < 0 || cfg.batch_size <= 0 || !(cfg.learning_rate > 0) || cfg.l2_lambda < 0) {
    throw Error("baseline", "InvalidConfig",
                "need epochs >= 0, batch_size > 0, learning_rate > 0, l2_lambda >= 0");
  }
  const auto positives = std::count(y.begin(), y.end(), BiasLabel::kBiased);
  if (positives == 0 || static_cast<std::size_t>(positives) == y.size()) {
    throw Error("baseline", "SingleClassTrainingSet", "training labels contain a single class");
  }
  TrainResult r;
  r.weights.w.assign(dim, 0.0);
  r.weights.config = cfg;
  check_shapes(r.weights, x, y);

  Rng rng(sub_seed(cfg.seed, "baseline"));
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> grad_w(dim, 0.0);
  std::vector<std::uint32_t> touched;
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      const double inv_n = 1.0 / static_cast<double>(end - start);
      double grad_b = 0.0;
      touched.clear();
      for (std::size_t k = start; k < end; ++k) {
        const auto& xi = x[order[k]];
        const double resid = (predict_proba(r.weights, xi) - target(y[order[k]])) * inv_n;
        grad_b += resid;
        for (const auto& [j, v] : xi) {
          if (grad_w[j] == 0.0) touched.push_back(j);
          grad_w[j] += resid * v;
        }
      }
      // The L2 term touches every coordinate: w <- w(1 - lr*lambda) - lr*g.
      const double shrink = 1.0 - cfg.learning_rate * cfg.l2_lambda;
      if (shrink != 1.0) {
        for (double& wj : r.weights.w) wj *= shrink;
      }
      std::sort(touched.begin(), touched.end());
      touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
      for (auto j : touched) {
        r.weights.w[j] -= cfg.learning_rate * grad_w[j];
        grad_w[j] = 0.0;
      }
      r.weights.b -= cfg.learning_rate * grad_b;
    }
    r.loss_history.push_back(loss(r.weights, x, y, cfg.l2_lambda));
  }
  r.final_loss = r.loss_history.empty() ? loss(r.weights, x, y, cfg.l2_lambda)
                                        : r.loss_history.back();
  return r;
}

Model train(const std::vector<std::string>& texts, const std::vector<BiasLabel>& labels,
            const TrainConfig& cfg, std::size_t min_df, double* final_loss) {
  if (texts.size() != labels.size()) {
    throw Error("baseline", "LengthMismatch", "texts and labels differ in length");
  }
  Model m;
  m.vocab = Vocabulary::build(texts, min_df);
  std::vector<SparseVector> x;
  x.reserve(texts.size());
  for (const auto& t : texts) x.push_back(featurize(t, m.vocab));
  auto r = train_features(x, labels, m.vocab.size(), cfg);
  m.weights = std::move(r.weights);
  if (final_loss) *final_loss = r.final_loss;
  return m;
}

double gradient_check(const ModelWeights& m, const std::vector<SparseVector>& x,
                      const std::vector<BiasLabel>& y, double l2_lambda, std::uint64_t seed) {
  if (x.empty()) throw Error("baseline", "EmptyBatch", "gradient check needs examples");
  constexpr std::size_t kMaxCoords = 50;
  constexpr double kStep = 1e-5;
  const Gradient g = loss_gradient(m, x, y, l2_lambda);

  std::set<std::uint32_t> present;
  for (const auto& row : x) {
    for (const auto& [j, v] : row) present.insert(j);
  }
  std::vector<std::uint32_t> coords(present.begin(), present.end());
  if (coords.size() > kMaxCoords - 1) {
    Rng rng(sub_seed(seed, "baseline.gradcheck"));
    rng.shuffle(coords);
    coords.resize(kMaxCoords - 1);
  } else if (!m.w.empty()) {
    Rng rng(sub_seed(seed, "baseline.gradcheck"));
    std::set<std::uint32_t> chosen(present);
    const std::size_t want = std::min(kMaxCoords - 1, m.w.size());
    for (int guard = 0; chosen.size() < want && guard < 10000; ++guard) {
      const auto j = static_cast<std::uint32_t>(rng.uniform_index(m.w.size()));
      if (chosen.insert(j).second) coords.push_back(j);
    }
  }
  std::sort(coords.begin(), coords.end());

  auto rel = [](double a, double n) {
    const double diff = std::fabs(a - n);
    if (diff == 0.0) return 0.0;
    return diff / std::max({std::fabs(a), std::fabs(n), 1e-8});
  };
  ModelWeights probe = m;
  double worst = 0.0;
  {
    probe.b = m.b + kStep;
    const double up = loss(probe, x, y, l2_lambda);
    probe.b = m.b - kStep;
    const double down = loss(probe, x, y, l2_lambda);
    probe.b = m.b;
    worst = std::max(worst, rel(g.b, (up - down) / (2 * kStep)));
  }
  for (auto j : coords) {
    probe.w[j] = m.w[j] + kStep;
    const double up = loss(probe, x, y, l2_lambda);
    probe.w[j] = m.w[j] - kStep;
    const double down = loss(probe, x, y, l2_lambda);
    probe.w[j] = m.w[j];
    worst = std::max(worst, rel(g.w[j], (up - down) / (2 * kStep)));
  }
  return worst;
}

// ---------------------------------------------------------------------------

namespace {

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

[[noreturn]] void malformed(const std::string& what) {
  throw Error("baseline", "MalformedWeights", what);
}

double parse_hex(std::string_view s) {
  const std::string str(s);
  char* end = nullptr;
  const double v = std::strtod(str.c_str(), &end);
  if (str.empty() || end != str.c_str() + str.size() || !std::isfinite(v)) {
    malformed("bad number '" + str + "'");
  }
  return v;
}

std::uint64_t parse_uint(std::string_view s) {
  const std::string str(s);
  char* end = nullptr;
  const auto v = std::strtoull(str.c_str(), &end, 10);
  if (str.empty() || end != str.c_str() + str.size()) malformed("bad integer '" + str + "'");
  return v;
}

}  // namespace

std::string serialize(const Model& model) {
  const auto& c = model.weights.config;
  std::string out = "annolex-baseline v1\n";
  out += "config learning_rate=" + hex(c.learning_rate) + " l2_lambda=" + hex(c.l2_lambda) +
         " epochs=" + std::to_string(c.epochs) + " batch_size=" + std::to_string(c.batch_size) +
         " seed=" + std::to_string(c.seed) + " min_df=" + std::to_string(model.vocab.min_df()) +
         "\n";
  out += "bias " + hex(model.weights.b) + "\n";
  out += "vocab " + std::to_string(model.vocab.size()) + "\n";
  for (std::size_t i = 0; i < model.vocab.size(); ++i) {
    out += model.vocab.tokens()[i] + "\t" + hex(model.weights.w[i]) + "\n";
  }
  return out;
}

Model deserialize(std::string_view content) {
  auto lines = text::split(content, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.size() < 4 || lines[0] != "annolex-baseline v1") malformed("missing header");
  Model m;
  std::size_t min_df = 2;
  {
    const auto fields = text::split_whitespace(lines[1]);
    if (fields.empty() || fields[0] != "config") malformed("missing config line");
    for (std::size_t i = 1; i < fields.size(); ++i) {
      const auto eq = fields[i].find('=');
      if (eq == std::string_view::npos) malformed("bad config field");
      const auto key = fields[i].substr(0, eq);
      const auto val = fields[i].substr(eq + 1);
      auto& c = m.weights.config;
      if (key == "learning_rate") c.learning_rate = parse_hex(val);
      else if (key == "l2_lambda") c.l2_lambda = parse_hex(val);
      else if (key == "epochs") c.epochs = static_cast<int>(parse_uint(val));
      else if (key == "batch_size") c.batch_size = static_cast<int>(parse_uint(val));
      else if (key == "seed") c.seed = parse_uint(val);
      else if (key == "min_df") min_df = parse_uint(val);
      else malformed("unknown config field '" + std::string(key) + "'");
    }
  }
  if (!lines[2].starts_with("bias ")) malformed("missing bias line");
  m.weights.b = parse_hex(std::string_view(lines[2]).substr(5));
  if (!lines[3].starts_with("vocab ")) malformed("missing vocab line");
  const auto n = parse_uint(std::string_view(lines[3]).substr(6));
  if (lines.size() != 4 + n) malformed("vocab count does not match entries");
  std::vector<std::string> tokens;
  m.weights.w.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& line = lines[4 + i];
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) malformed("bad vocab line " + std::to_string(i + 1));
    tokens.push_back(line.substr(0, tab));
    m.weights.w.push_back(parse_hex(std::string_view(line).substr(tab + 1)));
  }
  if (!std::is_sorted(tokens.begin(), tokens.end())) malformed("vocabulary is not sorted");
  m.vocab = Vocabulary::from_tokens(std::move(tokens), min_df);
  return m;
}

void save_model(const Model& model, const std::filesystem::path& path) {
  io::write_file_atomic(path, serialize(model));
}

Model load_model(const std::filesystem::path& path) { return deserialize(io::read_file(path)); }

}  // namespace annolex::baseline
