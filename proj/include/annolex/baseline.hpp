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
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "annolex/sparse.hpp"
#include "annolex/types.hpp"

// Bag-of-words logistic regression used as a stand-in downstream classifier.
namespace annolex::baseline {

/// Lowercased tokens sorted lexicographically; index = rank.
class Vocabulary {
 public:
  Vocabulary() = default;
  /// Keeps tokens that occur in at least `min_df` texts.
  static Vocabulary build(const std::vector<std::string>& texts, std::size_t min_df = 2);
  /// Tokens must be unique; order is normalized.
  static Vocabulary from_tokens(std::vector<std::string> tokens, std::size_t min_df = 2);

  std::optional<std::uint32_t> index_of(std::string_view token) const;
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }
  std::size_t min_df() const { return min_df_; }

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, std::uint32_t, std::less<>> index_;
  std::size_t min_df_ = 2;
};

/// Word tokens of the lowercased text; unknown tokens dropped; counts
/// L2-normalized. Empty when nothing is known.
SparseVector featurize(std::string_view text, const Vocabulary& vocab);

struct TrainConfig {
  double learning_rate = 0.5;
  double l2_lambda = 1e-4;
  int epochs = 50;
  int batch_size = 32;
  std::uint64_t seed = 0;
};

struct ModelWeights {
  std::vector<double> w;
  double b = 0.0;
  TrainConfig config;
};

struct Model {
  Vocabulary vocab;
  ModelWeights weights;
};

struct TrainResult {
  ModelWeights weights;
  double final_loss = 0.0;
  std::vector<double> loss_history;  // full-set loss after each epoch
};

/// Mini-batch gradient descent on mean binary cross-entropy plus
/// (l2_lambda/2)*|w|^2 (bias unregularized), reshuffling with a seeded
/// generator every epoch. Throws Error("baseline", "SingleClassTrainingSet"),
/// "EmptyTrainingSet" and "InvalidConfig".
TrainResult train_features(const std::vector<SparseVector>& x, const std::vector<BiasLabel>& y,
                           std::size_t dim, const TrainConfig& cfg);

/// Builds the vocabulary from `texts` and trains on their features.
Model train(const std::vector<std::string>& texts, const std::vector<BiasLabel>& labels,
            const TrainConfig& cfg, std::size_t min_df = 2, double* final_loss = nullptr);

double sigmoid(double z);
double logit(const ModelWeights& m, const SparseVector& x);
double predict_proba(const ModelWeights& m, const SparseVector& x);
/// Biased iff the probability is at least 0.5.
BiasLabel predict_label(const ModelWeights& m, const SparseVector& x);
std::pair<double, BiasLabel> predict(const Model& model, std::string_view text);

/// Regularized objective on a batch.
double loss(const ModelWeights& m, const std::vector<SparseVector>& x,
            const std::vector<BiasLabel>& y, double l2_lambda);

struct Gradient {
  std::vector<double> w;
  double b = 0.0;
};

/// Analytic gradient of loss(): mean of (p - y) x plus l2_lambda * w.
Gradient loss_gradient(const ModelWeights& m, const std::vector<SparseVector>& x,
                       const std::vector<BiasLabel>& y, double l2_lambda);

/// Max relative error between the analytic gradient and central differences
/// (step 1e-5) over at most 50 coordinates: the bias, the features present
/// in the batch, then seeded extra coordinates. Throws
/// Error("baseline", "EmptyBatch").
double gradient_check(const ModelWeights& m, const std::vector<SparseVector>& x,
                      const std::vector<BiasLabel>& y, double l2_lambda, std::uint64_t seed = 0);

/// Text format, one record per line:
///
///   annolex-baseline v1
///   config learning_rate=<hex> l2_lambda=<hex> epochs=<n> batch_size=<n> seed=<n> min_df=<n>
///   bias <hex>
///   vocab <n>
///   <token>\t<hex weight>          (n lines, lexicographic token order)
///
/// <hex> is a C99 hexadecimal float ("%a"), so values round-trip exactly.
std::string serialize(const Model& model);
/// Throws Error("baseline", "MalformedWeights").
Model deserialize(std::string_view content);
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace annolex::baseline
