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

#ifndef OPENDET_CLUSTMETRICS_HPP
#define OPENDET_CLUSTMETRICS_HPP

#include <utility>
#include <vector>

namespace opendet::clustmetrics {

/// Parallel label vectors for the same N samples. Labels may be sparse;
/// the metrics re-index them densely.
struct LabelPairing {
  std::vector<int> pred_labels;
  std::vector<int> gt_labels;
};

/// Rectangular cost matrix, row-major.
struct AssignmentMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> cost;

  double at(std::size_t r, std::size_t c) const { return cost[r * cols + c]; }
  double& at(std::size_t r, std::size_t c) { return cost[r * cols + c]; }
};

/// Min-cost assignment on the square matrix obtained by zero-padding.
/// Returns the (row, col) pairs that fall inside the original matrix,
/// sorted by row.
std::vector<std::pair<int, int>> hungarian_assign(const AssignmentMatrix& cost);

/// Best-bijection agreement between predicted clusters and classes,
/// in [0, 1], computed by min-cost assignment on the negated contingency
/// matrix. Averaged over the number of samples.
double clustering_accuracy(const LabelPairing& pairing);

/// Mutual information normalized by the mean of the two partition
/// entropies. Two identical single-cluster partitions score 1; zero mutual
/// information scores 0.
double nmi(const LabelPairing& pairing);

/// Fraction of samples belonging to the majority class of their cluster.
double purity(const LabelPairing& pairing);

}  // namespace opendet::clustmetrics

#endif  // OPENDET_CLUSTMETRICS_HPP
