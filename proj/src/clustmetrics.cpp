// Copyright 2026 opendet contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "opendet/clustmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "opendet/error.hpp"

namespace opendet::clustmetrics {

namespace {

void validate(const LabelPairing& pairing) {
  if (pairing.pred_labels.empty() ||
      pairing.pred_labels.size() != pairing.gt_labels.size()) {
    throw Error(ErrorKind::kConfigError,
                "label pairing needs two equal-length, non-empty label lists");
  }
  for (int label : pairing.pred_labels) {
    if (label < 0) throw Error(ErrorKind::kConfigError, "negative pred label");
  }
  for (int label : pairing.gt_labels) {
    if (label < 0) throw Error(ErrorKind::kConfigError, "negative gt label");
  }
}

std::vector<int> dense_reindex(const std::vector<int>& labels, int& n_distinct) {
  std::map<int, int> index;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = index.emplace(labels[i], static_cast<int>(index.size()));
    out[i] = it->second;
    (void)inserted;
  }
  n_distinct = static_cast<int>(index.size());
  return out;
}

/// Contingency counts: entry (i, j) = samples with pred cluster i and class j.
std::vector<std::vector<long>> contingency(const LabelPairing& pairing, int& n_pred,
                                           int& n_gt) {
  const auto pred = dense_reindex(pairing.pred_labels, n_pred);
  const auto gt = dense_reindex(pairing.gt_labels, n_gt);
  std::vector<std::vector<long>> counts(n_pred, std::vector<long>(n_gt, 0));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    ++counts[pred[i]][gt[i]];
  }
  return counts;
}

}  // namespace

std::vector<std::pair<int, int>> hungarian_assign(const AssignmentMatrix& cost) {
  if (cost.rows == 0 || cost.cols == 0 ||
      cost.cost.size() != cost.rows * cost.cols) {
    throw Error(ErrorKind::kConfigError, "assignment matrix is empty or malformed");
  }
  for (double v : cost.cost) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::kConfigError, "assignment matrix has non-finite entry");
    }
  }

  const int n = static_cast<int>(std::max(cost.rows, cost.cols));
  auto padded = [&](int r, int c) -> double {
    if (r < static_cast<int>(cost.rows) && c < static_cast<int>(cost.cols)) {
      return cost.at(r, c);
    }
    return 0.0;
  };

  // Shortest-augmenting-path assignment with row/column potentials,
  // 1-indexed internally. matched_row[j] is the row matched to column j.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> row_pot(n + 1, 0.0), col_pot(n + 1, 0.0);
  std::vector<int> matched_row(n + 1, 0), path_col(n + 1, 0);

  for (int r = 1; r <= n; ++r) {
    matched_row[0] = r;
    int j0 = 0;
    std::vector<double> min_reduced(n + 1, kInf);
    std::vector<bool> visited(n + 1, false);
    do {
      visited[j0] = true;
      const int i0 = matched_row[j0];
      int j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (visited[j]) continue;
        const double reduced = padded(i0 - 1, j - 1) - row_pot[i0] - col_pot[j];
        if (reduced < min_reduced[j]) {
          min_reduced[j] = reduced;
          path_col[j] = j0;
        }
        if (min_reduced[j] < delta) {
          delta = min_reduced[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (visited[j]) {
          row_pot[matched_row[j]] += delta;
          col_pot[j] -= delta;
        } else {
          min_reduced[j] -= delta;
        }
      }
      j0 = j1;
    } while (matched_row[j0] != 0);
    do {
      const int j1 = path_col[j0];
      matched_row[j0] = matched_row[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::pair<int, int>> assignment;
  for (int j = 1; j <= n; ++j) {
    const int r = matched_row[j] - 1;
    const int c = j - 1;
    if (r < static_cast<int>(cost.rows) && c < static_cast<int>(cost.cols)) {
      assignment.emplace_back(r, c);
    }
  }
  std::sort(assignment.begin(), assignment.end());
  return assignment;
}

double clustering_accuracy(const LabelPairing& pairing) {
  validate(pairing);
  int n_pred = 0, n_gt = 0;
  const auto counts = contingency(pairing, n_pred, n_gt);

  AssignmentMatrix cost;
  cost.rows = static_cast<std::size_t>(n_pred);
  cost.cols = static_cast<std::size_t>(n_gt);
  cost.cost.resize(cost.rows * cost.cols);
  for (int i = 0; i < n_pred; ++i) {
    for (int j = 0; j < n_gt; ++j) {
      cost.at(i, j) = -static_cast<double>(counts[i][j]);
    }
  }

  long matched = 0;
  for (const auto& [r, c] : hungarian_assign(cost)) {
    matched += counts[r][c];
  }
  return static_cast<double>(matched) / static_cast<double>(pairing.pred_labels.size());
}

double nmi(const LabelPairing& pairing) {
  validate(pairing);
  int n_pred = 0, n_gt = 0;
  const auto counts = contingency(pairing, n_pred, n_gt);
  const double total = static_cast<double>(pairing.pred_labels.size());

  std::vector<double> pred_marginal(n_pred, 0.0), gt_marginal(n_gt, 0.0);
  for (int i = 0; i < n_pred; ++i) {
    for (int j = 0; j < n_gt; ++j) {
      pred_marginal[i] += static_cast<double>(counts[i][j]);
      gt_marginal[j] += static_cast<double>(counts[i][j]);
    }
  }

  auto entropy = [&](const std::vector<double>& marginal) {
    double h = 0.0;
    for (double m : marginal) {
      if (m > 0.0) {
        const double p = m / total;
        h -= p * std::log(p);
      }
    }
    return h;
  };
  const double h_pred = entropy(pred_marginal);
  const double h_gt = entropy(gt_marginal);

  // Two deterministic partitions: identical trivial clusterings.
  if (h_pred == 0.0 && h_gt == 0.0) return 1.0;

  double mi = 0.0;
  for (int i = 0; i < n_pred; ++i) {
    for (int j = 0; j < n_gt; ++j) {
      if (counts[i][j] == 0) continue;
      const double joint = static_cast<double>(counts[i][j]) / total;
      mi += joint * std::log(joint * total * total /
                             (pred_marginal[i] * gt_marginal[j]));
    }
  }

  const double value = mi / ((h_pred + h_gt) / 2.0);
  return std::clamp(value, 0.0, 1.0);
}

double purity(const LabelPairing& pairing) {
  validate(pairing);
  int n_pred = 0, n_gt = 0;
  const auto counts = contingency(pairing, n_pred, n_gt);

  long majority_sum = 0;
  for (int i = 0; i < n_pred; ++i) {
    majority_sum += *std::max_element(counts[i].begin(), counts[i].end());
  }
  return static_cast<double>(majority_sum) /
         static_cast<double>(pairing.pred_labels.size());
}

}  // namespace opendet::clustmetrics
