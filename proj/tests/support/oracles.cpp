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


#include "oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "annolex/sampling.hpp"
#include "annolex/text.hpp"

namespace annolex::oracle {

using annotate::ParsedLabel;

double pearson(const std::vector<BiasLabel>& a, const std::vector<BiasLabel>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += static_cast<double>(a[i]);
    mb += static_cast<double>(b[i]);
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = static_cast<double>(a[i]) - ma, db = static_cast<double>(b[i]) - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  return saa == 0 || sbb == 0 ? 0.0 : sab / std::sqrt(saa * sbb);
}

ParsedLabel parse_label(std::string_view raw) {
  std::string s;
  for (char c : raw) {
    if (c == '-' || text::is_ascii_space(c)) {
      if (s.empty() || s.back() != ' ') s.push_back(' ');
    } else {
      s.push_back(text::to_lower(c));
    }
  }
  auto whole_at = [&](std::size_t i, std::string_view w) {
    if (s.compare(i, w.size(), w) != 0) return false;
    if (i > 0 && text::is_word_byte(s[i - 1])) return false;
    const std::size_t e = i + w.size();
    return e == s.size() || !text::is_word_byte(s[e]);
  };
  int pos = 0, neg = 0;
  for (std::size_t i = 0; i < s.size();) {
    if (whole_at(i, "not biased")) {
      ++neg;
      i += 10;
    } else if (whole_at(i, "biased")) {
      ++pos;
      i += 6;
    } else {
      ++i;
    }
  }
  return pos > neg ? ParsedLabel::kBiased : neg > pos ? ParsedLabel::kNotBiased : ParsedLabel::kInconclusive;
}

const std::vector<ParserCase>& parser_cases() {
  constexpr auto kB = ParsedLabel::kBiased;
  constexpr auto kN = ParsedLabel::kNotBiased;
  constexpr auto kI = ParsedLabel::kInconclusive;
  static const std::vector<ParserCase> cases = {
      {"The answer is NOT BIASED.", kN},
      {"The answer is BIASED.", kB},
      {"This sentence is BIASED, not NOT BIASED.", kI},
      {"It could be BIASED or NOT BIASED.", kI},
      {"the answer is biased", kB},
      {"The answer is Not Biased.", kN},
      {"The answer is not-biased.", kN},
      {"The answer is NOT\n  BIASED.", kN},
      {"I cannot decide.", kI},
      {"", kI},
      {"The sentence is unbiased.", kI},
      {"BIASEDNESS is not a word here.", kI},
      {"Biased? Yes. The answer is BIASED.", kB},
      {"Not biased at first glance, but the answer is BIASED. Clearly BIASED.", kB},
      {"The wording is neutral. The answer is NOT BIASED. NOT BIASED.", kN},
      {"\"BIASED\"", kB},
      {"(not biased)", kN},
      {"The framing is strongly biased: BIASED.", kB},
      {"It is not biased; the answer is NOT BIASED.", kN},
      {"BIASED NOT BIASED BIASED", kB},
      {"not  -  biased", kN},
      {"The answer: biased!", kB},
      {"notbiased", kI},
      {"The answer is NOT_BIASED.", kB},
  };
  return cases;
}

annotate::EnsembleResult vote(const std::array<ParsedLabel, 3>& v, annotate::VotePolicy policy) {
  annotate::EnsembleResult r;
  int b = 0, n = 0, i = 0;
  for (auto x : v) (x == ParsedLabel::kBiased ? b : x == ParsedLabel::kNotBiased ? n : i) += 1;
  if (policy == annotate::VotePolicy::kExcludeOnInconclusive && i > 0) {
    r.excluded_reason = annotate::ExcludedReason::kHasInconclusive;
  } else if (b > n) {
    r.final_label = BiasLabel::kBiased;
  } else if (n > b) {
    r.final_label = BiasLabel::kNotBiased;
  } else {
    r.excluded_reason = annotate::ExcludedReason::kTie;
  }
  return r;
}

std::vector<std::size_t> top_k(const std::vector<double>& q,
                               const std::vector<prompting::Embedding>& pool, std::size_t k) {
  std::vector<std::pair<long double, std::size_t>> sims;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    long double d = 0, na = 0, nb = 0;
    for (std::size_t j = 0; j < q.size(); ++j) {
      d += static_cast<long double>(q[j]) * pool[i].values[j];
      na += static_cast<long double>(q[j]) * q[j];
      nb += static_cast<long double>(pool[i].values[j]) * pool[i].values[j];
    }
    sims.emplace_back(na == 0 || nb == 0 ? 0.0L : d / std::sqrt(na * nb), i);
  }
  std::stable_sort(sims.begin(), sims.end(), [](auto& a, auto& b) { return a.first > b.first; });
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(sims[i].second);
  return out;
}

double optimum_radius(std::size_t n, std::size_t m,
                      const std::function<double(std::size_t, std::size_t)>& d) {
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != m) continue;
    std::vector<std::size_t> c;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) c.push_back(i);
    best = std::min(best, sampling::covering_radius(n, c, d));
  }
  return best;
}

double chi_square1_tail(double x) {
  // P(X > x) = 2 * integral of phi(z) over [sqrt(x), inf); the integrand is
  // negligible 40 units past the lower limit.
  const double a = std::sqrt(x), b = a + 40.0;
  const int steps = 400000;
  const double h = (b - a) / steps;
  auto phi = [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); };
  double s = phi(a) + phi(b);
  for (int i = 1; i < steps; ++i) s += phi(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return 2.0 * s * h / 3.0;
}

}  // namespace annolex::oracle
