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

#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace annolex {

/// (index, value) pairs with strictly increasing indices.
using SparseVector = std::vector<std::pair<std::uint32_t, double>>;

inline double dot(const SparseVector& a, const SparseVector& b) {
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first == b[j].first) {
      s += a[i].second * b[j].second;
      ++i, ++j;
    } else if (a[i].first < b[j].first) {
      ++i;
    } else {
      ++j;
    }
  }
  return s;
}

inline double dot(const SparseVector& a, std::span<const double> dense) {
  double s = 0.0;
  for (const auto& [idx, v] : a) s += v * dense[idx];
  return s;
}

inline double squared_norm(const SparseVector& a) {
  double s = 0.0;
  for (const auto& [idx, v] : a) s += v * v;
  return s;
}

inline double euclidean_distance(const SparseVector& a, const SparseVector& b) {
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    double d;
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      d = a[i++].second;
    } else if (i == a.size() || b[j].first < a[i].first) {
      d = b[j++].second;
    } else {
      d = a[i++].second - b[j++].second;
    }
    s += d * d;
  }
  return std::sqrt(s);
}

inline double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace annolex
