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


#include "annolex/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <unordered_map>

#include "annolex/error.hpp"
#include "annolex/io.hpp"

namespace annolex::metrics {

ConfusionCounts confusion(const std::vector<BiasLabel>& preds, const std::vector<BiasLabel>& golds) {
  if (preds.size() != golds.size()) {
    throw Error("metrics", "LengthMismatch",
                std::to_string(preds.size()) + " predictions vs " + std::to_string(golds.size()) +
                    " gold labels");
  }
  if (preds.empty()) throw Error("metrics", "Empty", "nothing to score");
  ConfusionCounts c;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool p = preds[i] == BiasLabel::kBiased;
    const bool g = golds[i] == BiasLabel::kBiased;
    if (p && g) ++c.tp;
    else if (p) ++c.fp;
    else if (g) ++c.fn;
    else ++c.tn;
  }
  return c;
}

double mcc(const ConfusionCounts& c) {
  using R = long double;
  const R tp = c.tp, fp = c.fp, tn = c.tn, fn = c.fn;
  const R d1 = tp + fp, d2 = tp + fn, d3 = tn + fp, d4 = tn + fn;
  if (d1 == 0 || d2 == 0 || d3 == 0 || d4 == 0) return 0.0;
  const R v = (tp * tn - fp * fn) / std::sqrt(d1 * d2 * d3 * d4);
  return static_cast<double>(std::clamp<R>(v, -1, 1));
}

Prf1 prf1(const ConfusionCounts& c) {
  Prf1 r;
  const auto tp = static_cast<double>(c.tp);
  if (c.tp + c.fp > 0) r.precision = tp / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) r.recall = tp / static_cast<double>(c.tp + c.fn);
  if (r.precision + r.recall > 0) r.f1 = 2 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

double accuracy(const ConfusionCounts& c) {
  return c.total() == 0 ? 0.0
                        : static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

std::string_view to_string(McNemarMethod m) {
  return m == McNemarMethod::kExactBinomial ? "exact-binomial" : "chi-square-cc";
}

double chi_square1_upper_tail(double x) {
  if (x <= 0) return 1.0;
  return std::erfc(std::sqrt(x / 2.0));
}

McNemarResult mcnemar_from_counts(std::uint64_t b, std::uint64_t c) {
  if (b + c == 0) throw Error("metrics", "NoDisagreements", "b + c == 0");
  McNemarResult r;
  r.b = b;
  r.c = c;
  const std::uint64_t n = b + c;
  const double diff = std::fabs(static_cast<double>(b) - static_cast<double>(c));
  if (n < kExactThreshold) {
    r.method = McNemarMethod::kExactBinomial;
    r.statistic = diff * diff / static_cast<double>(n);
    // Exact integer tail: sum_{i<=k} C(n, i), n < 25 keeps everything in 64 bits.
    const std::uint64_t k = std::min(b, c);
    std::uint64_t coeff = 1, tail = 0;
    for (std::uint64_t i = 0; i <= k; ++i) {
      tail += coeff;
      coeff = coeff * (n - i) / (i + 1);
    }
    const double p = 2.0 * static_cast<double>(tail) / std::ldexp(1.0, static_cast<int>(n));
    r.p_value = std::min(1.0, p);
  } else {
    r.method = McNemarMethod::kChiSquareCC;
    r.statistic = (diff - 1.0) * (diff - 1.0) / static_cast<double>(n);
    r.p_value = std::min(1.0, chi_square1_upper_tail(r.statistic));
  }
  return r;
}

McNemarResult mcnemar(const std::vector<BiasLabel>& preds_a, const std::vector<BiasLabel>& preds_b,
                      const std::vector<BiasLabel>& golds) {
  if (preds_a.size() != golds.size() || preds_b.size() != golds.size()) {
    throw Error("metrics", "LengthMismatch", "prediction lists differ in length from gold labels");
  }
  std::uint64_t b = 0, c = 0;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    const bool a_ok = preds_a[i] == golds[i];
    const bool b_ok = preds_b[i] == golds[i];
    if (a_ok && !b_ok) ++b;
    if (!a_ok && b_ok) ++c;
  }
  return mcnemar_from_counts(b, c);
}

std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s.starts_with("-") && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

BenchmarkMatrix benchmark_from_cells(const std::vector<BenchmarkCell>& cells,
                                     const std::vector<std::string>& column_order) {
  BenchmarkMatrix m;
  std::set<std::pair<std::string, std::string>> seen;
  auto column_of = [&](const std::string& s) {
    auto it = std::find(m.columns.begin(), m.columns.end(), s);
    if (it != m.columns.end()) return static_cast<std::size_t>(it - m.columns.begin());
    m.columns.push_back(s);
    return m.columns.size() - 1;
  };
  for (const auto& s : column_order) column_of(s);
  std::vector<std::string> models;
  for (const auto& cell : cells) {
    if (!seen.emplace(cell.model, cell.settings).second) {
      throw Error("metrics", "DuplicateRun", cell.model + " / " + cell.settings);
    }
    column_of(cell.settings);
    if (std::find(models.begin(), models.end(), cell.model) == models.end()) {
      models.push_back(cell.model);
    }
  }
  for (const auto& model : models) {
    BenchmarkRow row;
    row.model = model;
    row.cells.assign(m.columns.size(), std::nullopt);
    for (const auto& cell : cells) {
      if (cell.model == model) row.cells[column_of(cell.settings)] = cell.mcc;
    }
    double sum = 0.0;
    std::size_t defined = 0;
    for (const auto& v : row.cells) {
      if (v) {
        sum += *v;
        ++defined;
      }
    }
    if (defined > 0) row.mean = sum / static_cast<double>(defined);
    m.rows.push_back(std::move(row));
  }
  std::stable_sort(m.rows.begin(), m.rows.end(), [](const BenchmarkRow& a, const BenchmarkRow& b) {
    if (a.mean.has_value() != b.mean.has_value()) return a.mean.has_value();
    if (a.mean && *a.mean != *b.mean) return *a.mean > *b.mean;
    return a.model < b.model;
  });
  return m;
}

BenchmarkMatrix benchmark_matrix(const std::vector<BenchmarkRun>& runs,
                                 const std::vector<BiasLabel>& golds,
                                 const std::vector<std::string>& column_order) {
  std::vector<BenchmarkCell> cells;
  for (const auto& run : runs) {
    if (run.preds.size() != golds.size()) {
      throw Error("metrics", "LengthMismatch",
                  run.model + " / " + run.settings + ": " + std::to_string(run.preds.size()) +
                      " predictions vs " + std::to_string(golds.size()) + " gold labels");
    }
    cells.push_back({run.model, run.settings, mcc(confusion(run.preds, golds))});
  }
  return benchmark_from_cells(cells, column_order);
}

std::string BenchmarkMatrix::to_csv() const {
  std::vector<std::string> header = {"model"};
  header.insert(header.end(), columns.begin(), columns.end());
  header.push_back("mean");
  std::string out = io::csv_line(header);
  for (const auto& row : rows) {
    std::vector<std::string> fields = {row.model};
    for (const auto& v : row.cells) fields.push_back(v ? format_fixed(*v) : "-");
    fields.push_back(row.mean ? format_fixed(*row.mean) : "-");
    out += io::csv_line(fields);
  }
  return out;
}

std::string BenchmarkMatrix::to_text() const {
  std::vector<std::vector<std::string>> table;
  std::vector<std::string> header = {"model"};
  header.insert(header.end(), columns.begin(), columns.end());
  header.push_back("mean");
  table.push_back(header);
  for (const auto& row : rows) {
    std::vector<std::string> fields = {row.model};
    for (const auto& v : row.cells) fields.push_back(v ? format_fixed(*v) : "-");
    fields.push_back(row.mean ? format_fixed(*row.mean) : "-");
    table.push_back(std::move(fields));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& r : table) {
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  std::string out;
  for (const auto& r : table) {
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i > 0) line += "  ";
      // Model names align left, numbers right.
      const std::string pad(width[i] - r[i].size(), ' ');
      line += i == 0 ? r[i] + pad : pad + r[i];
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

nlohmann::ordered_json BenchmarkMatrix::to_json() const {
  nlohmann::ordered_json j;
  j["columns"] = columns;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    nlohmann::ordered_json r;
    r["model"] = row.model;
    r["cells"] = nlohmann::ordered_json::array();
    for (const auto& v : row.cells) {
      r["cells"].push_back(v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr));
    }
    r["mean"] = row.mean ? nlohmann::ordered_json(*row.mean) : nlohmann::ordered_json(nullptr);
    j["rows"].push_back(std::move(r));
  }
  return j;
}

std::vector<std::pair<std::string, BiasLabel>> read_labels_csv(const std::filesystem::path& path,
                                                               std::optional<std::string> split) {
  const io::CsvTable table = io::read_csv(path);
  const std::size_t id_col = table.column("sentence_id");
  const std::size_t label_col = table.column("label");
  std::optional<std::size_t> split_col;
  if (split) split_col = table.column("split");
  std::vector<std::pair<std::string, BiasLabel>> out;
  std::set<std::string> seen;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (split_col && row[*split_col] != *split) continue;
    auto label = parse_bias_label(row[label_col]);
    if (!label) {
      throw Error("metrics", "MalformedLabel",
                  path.string() + ": row " + std::to_string(r + 1) + ": '" + row[label_col] + "'");
    }
    if (!seen.insert(row[id_col]).second) {
      throw Error("metrics", "DuplicateId", path.string() + ": " + row[id_col]);
    }
    out.emplace_back(row[id_col], *label);
  }
  return out;
}

std::string labels_to_csv(const std::vector<std::pair<std::string, BiasLabel>>& labels) {
  std::string out = io::csv_line({"sentence_id", "label"});
  for (const auto& [id, label] : labels) out += io::csv_line({id, std::string(to_string(label))});
  return out;
}

std::vector<BiasLabel> align_to(const std::vector<std::pair<std::string, BiasLabel>>& preds,
                                const std::vector<std::pair<std::string, BiasLabel>>& golds) {
  std::unordered_map<std::string, BiasLabel> by_id;
  for (const auto& [id, label] : preds) by_id.emplace(id, label);
  std::vector<BiasLabel> out;
  out.reserve(golds.size());
  for (const auto& [id, gold] : golds) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw Error("metrics", "MissingPrediction", "no prediction for " + id);
    out.push_back(it->second);
  }
  return out;
}

}  // namespace annolex::metrics
