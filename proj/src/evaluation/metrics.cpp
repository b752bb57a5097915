// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#include "evaluation/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "core/error.hpp"

namespace partcraft {

namespace {

struct Contingency {
  std::vector<std::vector<double>> table;
  std::vector<double> rows;
  std::vector<double> cols;
  double n = 0.0;
};

std::vector<int> compress(const std::vector<int>& labels, int& count) {
  std::map<int, int> ids;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out[i] = ids.emplace(labels[i], static_cast<int>(ids.size())).first->second;
  }
  count = static_cast<int>(ids.size());
  return out;
}

Contingency contingency(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kInvalidArgument, "labelings differ in length");
  if (a.empty()) throw Error(ErrorCode::kInvalidArgument, "labelings are empty");
  int ka = 0;
  int kb = 0;
  const auto ca = compress(a, ka);
  const auto cb = compress(b, kb);
  Contingency c;
  c.table.assign(ka, std::vector<double>(kb, 0.0));
  c.rows.assign(ka, 0.0);
  c.cols.assign(kb, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    c.table[ca[i]][cb[i]] += 1.0;
    c.rows[ca[i]] += 1.0;
    c.cols[cb[i]] += 1.0;
  }
  c.n = static_cast<double>(a.size());
  return c;
}

double entropy(const std::vector<double>& counts, double n) {
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) h -= (c / n) * std::log(c / n);
  }
  return h;
}

double pairs(double x) { return x * (x - 1.0) / 2.0; }

}  // namespace

double nmi(const std::vector<int>& a, const std::vector<int>& b) {
  const Contingency c = contingency(a, b);
  const double ha = entropy(c.rows, c.n);
  const double hb = entropy(c.cols, c.n);
  if (ha <= 0.0 || hb <= 0.0) return 0.0;
  double mi = 0.0;
  for (std::size_t i = 0; i < c.rows.size(); ++i) {
    for (std::size_t j = 0; j < c.cols.size(); ++j) {
      const double nij = c.table[i][j];
      if (nij > 0.0) mi += (nij / c.n) * std::log(c.n * nij / (c.rows[i] * c.cols[j]));
    }
  }
  return std::clamp(mi / (0.5 * (ha + hb)), 0.0, 1.0);
}

double ari(const std::vector<int>& a, const std::vector<int>& b) {
  const Contingency c = contingency(a, b);
  double index = 0.0;
  for (const auto& row : c.table) {
    for (double nij : row) index += pairs(nij);
  }
  double sum_a = 0.0;
  double sum_b = 0.0;
  for (double r : c.rows) sum_a += pairs(r);
  for (double col : c.cols) sum_b += pairs(col);
  const double total = pairs(c.n);
  if (total == 0.0) return 1.0;
  const double expected = sum_a * sum_b / total;
  const double maximum = 0.5 * (sum_a + sum_b);
  const double denom = maximum - expected;
  if (denom == 0.0) return 1.0;
  return (index - expected) / denom;
}

std::pair<std::vector<int>, std::vector<int>> fg_restrict(const std::vector<int>& pred, const std::vector<int>& gt,
                                                          const std::vector<std::uint8_t>& foreground) {
  if (pred.size() != gt.size() || pred.size() != foreground.size()) {
    throw Error(ErrorCode::kInvalidArgument, "prediction, ground truth and foreground differ in size");
  }
  std::pair<std::vector<int>, std::vector<int>> out;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!foreground[i]) continue;
    out.first.push_back(pred[i]);
    out.second.push_back(gt[i]);
  }
  if (out.first.empty()) throw Error(ErrorCode::kInvalidArgument, "empty foreground");
  return out;
}

}  // namespace partcraft
