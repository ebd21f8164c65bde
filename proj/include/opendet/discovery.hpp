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

#ifndef OPENDET_DISCOVERY_HPP_
#define OPENDET_DISCOVERY_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "opendet/vecmath.hpp"

namespace opendet::discovery {

/// One known-class embedding used as a clustering constraint.
struct LabeledEmbedding {
  int class_id = 0;
  Vec vector;
};

struct KmeansResult {
  std::vector<int> assignments;  // per input point, in input order
  std::vector<Vec> centroids;
  std::vector<double> inertia_history;  // assignment-step inertia per iteration
  int iterations_run = 0;
  double inertia = 0.0;  // against the returned centroids
};

/// Categories discovered over working memory, keyed by object id.
struct DiscoveryResult {
  std::map<std::string, int> assignments;  // object_id -> novel category
  std::vector<Vec> novel_centroids;
  std::vector<Vec> known_centroids;  // one per known class, sorted class order
  int iterations_run = 0;
  double inertia = 0.0;  // working points vs their final novel centroids
};

struct KEstimate {
  int k_est = 1;
  std::map<int, double> scores_per_k;
  std::pair<int, int> search_range{1, 1};
};

/// Seeded k-means++ initialization: first centroid uniform, each next drawn
/// proportional to squared distance from the nearest chosen centroid.
/// Already-chosen points carry zero weight; if every distance is zero the
/// draw falls back to uniform over all points.
std::vector<Vec> kmeans_pp_init(const std::vector<Vec>& points, int k,
                                std::uint64_t seed);

/// Lloyd iterations from the given centroids. An iteration is one assignment
/// pass plus one centroid update; a cluster left empty is reseeded to the
/// point farthest from its assigned centroid. Stops when the largest centroid
/// displacement drops below tol. Returned assignments and inertia come from a
/// last assignment pass against the final centroids.
KmeansResult kmeans(const std::vector<Vec>& points, int k,
                    const std::vector<Vec>& init_centroids, int max_iter = 300,
                    double tol = 1e-6);

/// Semi-supervised k-means: labeled embeddings are hard-assigned to their
/// class cluster throughout; working points compete over all centroids
/// (per-class means plus k_novel centroids seeded by k-means++ over the
/// working set). After convergence every working object is reassigned to its
/// nearest novel centroid, so assignments cover working memory exactly.
/// With an empty known set this reduces to kmeans on the working points.
DiscoveryResult constrained_kmeans(const std::vector<LabeledEmbedding>& known,
                                   const std::vector<Vec>& working,
                                   const std::vector<std::string>& working_ids,
                                   int k_novel, std::uint64_t seed,
                                   int max_iter = 300, double tol = 1e-6);

/// Parameter-free hierarchical clustering from first-neighbour adjacency:
/// points i and j join when one is the other's first nearest neighbour or
/// they share one; levels recurse on cluster means until a single cluster
/// remains. Returns per-point labels per level, finest level first, with
/// strictly decreasing cluster counts.
std::vector<std::vector<int>> finch(const std::vector<Vec>& points);

/// Picks the level whose cluster count is closest to k; ties go to the finer
/// (larger-count) level.
std::vector<int> select_partition(const std::vector<std::vector<int>>& partitions,
                                  int k);

/// Estimates how many novel categories the working set holds. Known classes
/// are split in half: the lower-id half stays as constraints, the held-out
/// half is pooled with the working set and treated as unlabeled. Each
/// candidate k clusters the pool into k + held-out-class-count novel
/// clusters and is scored by the mean of held-out clustering accuracy and
/// the pool's silhouette width mapped to [0, 1] — accuracy alone cannot
/// punish merged clusters, silhouette alone never sees the labels. The
/// best-scoring k wins (ties to the smaller k).
KEstimate estimate_class_number(const std::vector<LabeledEmbedding>& known,
                                const std::vector<Vec>& working, int k_min,
                                int k_max, std::uint64_t seed);

}  // namespace opendet::discovery

#endif  // OPENDET_DISCOVERY_HPP_
