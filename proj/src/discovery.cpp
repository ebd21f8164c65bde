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

#include "opendet/discovery.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>

#include "opendet/clustmetrics.hpp"
#include "opendet/error.hpp"
#include "opendet/rng.hpp"

namespace opendet::discovery {

namespace {

void check_points(const std::vector<Vec>& points, const char* what) {
  if (points.empty()) {
    throw Error(ErrorKind::kTooFewPoints, std::string(what) + ": no points");
  }
  const std::size_t d = points.front().size();
  for (const Vec& p : points) {
    if (p.size() != d || d == 0) {
      throw Error(ErrorKind::kDimensionMismatch, std::string(what) + ": inconsistent dimensions");
    }
  }
}

int nearest_centroid(const Vec& point, const std::vector<Vec>& centroids, double& best_d2) {
  int best = 0;
  best_d2 = squared_distance(point, centroids[0]);
  for (std::size_t c = 1; c < centroids.size(); ++c) {
    const double d2 = squared_distance(point, centroids[c]);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = static_cast<int>(c);
    }
  }
  return best;
}

/// Per-cluster sum and count of hard-constrained members. Free clusters use
/// zeroed sums.
struct FixedMass {
  std::vector<Vec> sums;
  std::vector<std::size_t> counts;
};

struct LloydOutcome {
  std::vector<int> assignments;  // free points, over all clusters
  std::vector<Vec> centroids;    // constrained clusters first, then free
  std::vector<double> inertia_history;
  int iterations_run = 0;
};

/// Lloyd's iterations over the free points with n_constrained leading
/// clusters whose fixed membership never changes. Free clusters left empty
/// are reseeded to the free point farthest from its assigned centroid.
LloydOutcome run_lloyd(const std::vector<Vec>& free_points, const FixedMass& fixed,
                       std::size_t n_constrained, std::vector<Vec> centroids,
                       int max_iter, double tol) {
  const std::size_t n = free_points.size();
  const std::size_t k_total = centroids.size();
  const std::size_t k_free = k_total - n_constrained;
  const std::size_t d = free_points.front().size();

  LloydOutcome out;
  out.assignments.assign(n, 0);
  std::vector<double> d2(n, 0.0);

  for (int iter = 0; iter < max_iter; ++iter) {
    double inertia = 0.0;
    std::vector<std::size_t> counts(k_total, 0);
    for (std::size_t i = 0; i < n; ++i) {
      out.assignments[i] = nearest_centroid(free_points[i], centroids, d2[i]);
      inertia += d2[i];
      ++counts[out.assignments[i]];
    }
    out.inertia_history.push_back(inertia);

    // Give every empty free cluster the currently worst-fit point. A donor
    // singleton can empty its own cluster, so rescan until stable; each
    // reseeded point is retired from candidacy.
    for (std::size_t guard = 0; guard < n + k_free; ++guard) {
      std::size_t empty = k_total;
      for (std::size_t c = n_constrained; c < k_total; ++c) {
        if (counts[c] == 0) {
          empty = c;
          break;
        }
      }
      if (empty == k_total) break;
      std::size_t donor = n;
      double worst = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] > worst) {
          worst = d2[i];
          donor = i;
        }
      }
      if (donor == n || worst < 0.0) break;
      --counts[out.assignments[donor]];
      out.assignments[donor] = static_cast<int>(empty);
      ++counts[empty];
      d2[donor] = -1.0;
    }

    std::vector<Vec> sums(k_total, Vec(d, 0.0));
    std::vector<std::size_t> members(k_total, 0);
    for (std::size_t c = 0; c < n_constrained; ++c) {
      sums[c] = fixed.sums[c];
      members[c] = fixed.counts[c];
    }
    for (std::size_t i = 0; i < n; ++i) {
      axpy(1.0, free_points[i], sums[out.assignments[i]]);
      ++members[out.assignments[i]];
    }

    double shift = 0.0;
    for (std::size_t c = 0; c < k_total; ++c) {
      if (members[c] == 0) continue;  // unreachable for free clusters post-reseed
      scale(sums[c], 1.0 / static_cast<double>(members[c]));
      shift = std::max(shift, distance(centroids[c], sums[c]));
      centroids[c] = std::move(sums[c]);
    }

    out.iterations_run = iter + 1;
    if (shift < tol) break;
  }

  out.centroids = std::move(centroids);
  return out;
}

FixedMass class_mass(const std::vector<LabeledEmbedding>& known,
                     std::vector<int>& sorted_class_ids, std::size_t dim) {
  sorted_class_ids.clear();
  for (const LabeledEmbedding& e : known) {
    if (e.vector.size() != dim) {
      throw Error(ErrorKind::kDimensionMismatch, "labeled embedding dimension mismatch");
    }
    sorted_class_ids.push_back(e.class_id);
  }
  std::sort(sorted_class_ids.begin(), sorted_class_ids.end());
  sorted_class_ids.erase(std::unique(sorted_class_ids.begin(), sorted_class_ids.end()),
                         sorted_class_ids.end());

  FixedMass fixed;
  fixed.sums.assign(sorted_class_ids.size(), Vec(dim, 0.0));
  fixed.counts.assign(sorted_class_ids.size(), 0);
  for (const LabeledEmbedding& e : known) {
    const std::size_t c = static_cast<std::size_t>(
        std::lower_bound(sorted_class_ids.begin(), sorted_class_ids.end(), e.class_id) -
        sorted_class_ids.begin());
    axpy(1.0, e.vector, fixed.sums[c]);
    ++fixed.counts[c];
  }
  return fixed;
}

struct ConstrainedCore {
  std::vector<int> novel_assignments;  // per working point, novel index
  std::vector<Vec> novel_centroids;
  std::vector<Vec> known_centroids;
  int iterations_run = 0;
  double inertia = 0.0;
};

ConstrainedCore constrained_core(const std::vector<LabeledEmbedding>& known,
                                 const std::vector<Vec>& working, int k_novel,
                                 std::uint64_t seed, int max_iter, double tol) {
  check_points(working, "constrained clustering working set");
  if (k_novel < 1 || static_cast<std::size_t>(k_novel) > working.size()) {
    throw Error(ErrorKind::kTooFewPoints, "need at least k_novel working points");
  }

  const std::size_t d = working.front().size();
  std::vector<int> class_ids;
  FixedMass fixed = class_mass(known, class_ids, d);
  const std::size_t m = class_ids.size();

  std::vector<Vec> centroids;
  centroids.reserve(m + k_novel);
  for (std::size_t c = 0; c < m; ++c) {
    Vec mean = fixed.sums[c];
    scale(mean, 1.0 / static_cast<double>(fixed.counts[c]));
    centroids.push_back(std::move(mean));
  }
  for (Vec& c : kmeans_pp_init(working, k_novel, seed)) centroids.push_back(std::move(c));

  LloydOutcome lloyd = run_lloyd(working, fixed, m, std::move(centroids), max_iter, tol);

  ConstrainedCore core;
  core.iterations_run = lloyd.iterations_run;
  core.known_centroids.assign(lloyd.centroids.begin(), lloyd.centroids.begin() + m);
  core.novel_centroids.assign(lloyd.centroids.begin() + m, lloyd.centroids.end());

  // Final pass: every working object lands in a novel category, even those
  // the converged state had parked inside a known cluster.
  core.novel_assignments.resize(working.size());
  for (std::size_t i = 0; i < working.size(); ++i) {
    double d2 = 0.0;
    core.novel_assignments[i] = nearest_centroid(working[i], core.novel_centroids, d2);
    core.inertia += d2;
  }
  return core;
}

std::size_t partition_cluster_count(const std::vector<int>& partition) {
  std::vector<int> labels = partition;
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  return labels.size();
}

/// Mean silhouette width in [-1, 1] from a precomputed n x n distance matrix.
/// Singleton-cluster points score 0; fewer than two occupied clusters score 0.
double mean_silhouette(const std::vector<double>& dist, std::size_t n,
                       const std::vector<int>& assign, int k) {
  std::vector<std::size_t> size(static_cast<std::size_t>(k), 0);
  for (int a : assign) ++size[static_cast<std::size_t>(a)];
  std::size_t occupied = 0;
  for (std::size_t c = 0; c < size.size(); ++c) occupied += size[c] > 0 ? 1 : 0;
  if (occupied < 2 || n < 2) return 0.0;

  double total = 0.0;
  std::vector<double> sum_to(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(sum_to.begin(), sum_to.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) sum_to[static_cast<std::size_t>(assign[j])] += dist[i * n + j];
    }
    const std::size_t own = static_cast<std::size_t>(assign[i]);
    if (size[own] <= 1) continue;
    const double a = sum_to[own] / static_cast<double>(size[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < size.size(); ++c) {
      if (c == own || size[c] == 0) continue;
      b = std::min(b, sum_to[c] / static_cast<double>(size[c]));
    }
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

// Silhouette cost is quadratic in pool size, so large pools are scored on a
// seeded subsample.
constexpr std::size_t kSilhouetteCap = 2048;

}  // namespace

std::vector<Vec> kmeans_pp_init(const std::vector<Vec>& points, int k,
                                std::uint64_t seed) {
  check_points(points, "k-means++ init");
  const std::size_t n = points.size();
  if (k < 1 || static_cast<std::size_t>(k) > n) {
    throw Error(ErrorKind::kTooFewPoints, "k must lie in [1, point count]");
  }

  Rng rng(seed);
  std::vector<Vec> centroids;
  centroids.reserve(k);
  centroids.push_back(points[rng.index(n)]);

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points[i], centroids[0]);

  while (centroids.size() < static_cast<std::size_t>(k)) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick = 0;
    if (total <= 0.0) {
      pick = rng.index(n);  // degenerate: every point coincides with a centroid
    } else {
      const double r = rng.uniform() * total;
      double cum = 0.0;
      std::size_t last_positive = 0;
      bool found = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        last_positive = i;
        cum += d2[i];
        if (r < cum) {
          pick = i;
          found = true;
          break;
        }
      }
      if (!found) pick = last_positive;  // r landed on the rounding edge
    }
    centroids.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points[i], centroids.back()));
    }
  }
  return centroids;
}

KmeansResult kmeans(const std::vector<Vec>& points, int k,
                    const std::vector<Vec>& init_centroids, int max_iter, double tol) {
  check_points(points, "k-means");
  if (k < 1 || static_cast<std::size_t>(k) > points.size()) {
    throw Error(ErrorKind::kTooFewPoints, "k must lie in [1, point count]");
  }
  if (init_centroids.size() != static_cast<std::size_t>(k)) {
    throw Error(ErrorKind::kConfigError, "init centroid count must equal k");
  }
  for (const Vec& c : init_centroids) {
    if (c.size() != points.front().size()) {
      throw Error(ErrorKind::kDimensionMismatch, "init centroid dimension mismatch");
    }
  }
  if (max_iter < 1 || tol < 0.0) {
    throw Error(ErrorKind::kConfigError, "max_iter must be >= 1 and tol >= 0");
  }

  FixedMass no_constraints;
  LloydOutcome lloyd = run_lloyd(points, no_constraints, 0, init_centroids, max_iter, tol);

  KmeansResult result;
  result.centroids = std::move(lloyd.centroids);
  result.inertia_history = std::move(lloyd.inertia_history);
  result.iterations_run = lloyd.iterations_run;
  result.assignments.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    double d2 = 0.0;
    result.assignments[i] = nearest_centroid(points[i], result.centroids, d2);
    result.inertia += d2;
  }
  return result;
}

DiscoveryResult constrained_kmeans(const std::vector<LabeledEmbedding>& known,
                                   const std::vector<Vec>& working,
                                   const std::vector<std::string>& working_ids,
                                   int k_novel, std::uint64_t seed, int max_iter,
                                   double tol) {
  if (working_ids.size() != working.size()) {
    throw Error(ErrorKind::kConfigError, "one id required per working embedding");
  }
  if (max_iter < 1 || tol < 0.0) {
    throw Error(ErrorKind::kConfigError, "max_iter must be >= 1 and tol >= 0");
  }
  ConstrainedCore core = constrained_core(known, working, k_novel, seed, max_iter, tol);

  DiscoveryResult result;
  result.novel_centroids = std::move(core.novel_centroids);
  result.known_centroids = std::move(core.known_centroids);
  result.iterations_run = core.iterations_run;
  result.inertia = core.inertia;
  for (std::size_t i = 0; i < working_ids.size(); ++i) {
    const auto [it, inserted] =
        result.assignments.emplace(working_ids[i], core.novel_assignments[i]);
    if (!inserted) {
      throw Error(ErrorKind::kDuplicateId, "duplicate working object id: " + working_ids[i]);
    }
  }
  return result;
}

std::vector<std::vector<int>> finch(const std::vector<Vec>& points) {
  check_points(points, "finch");
  const std::size_t n = points.size();
  if (n < 2) {
    throw Error(ErrorKind::kTooFewPoints, "finch needs at least two points");
  }

  std::vector<std::vector<int>> partitions;
  std::vector<Vec> items = points;
  std::vector<int> membership(n);
  for (std::size_t i = 0; i < n; ++i) membership[i] = static_cast<int>(i);

  while (true) {
    const std::size_t m = items.size();
    std::vector<std::size_t> nn(m, 0);
    for (std::size_t i = 0; i < m; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < m; ++j) {
        if (j == i) continue;
        const double d2 = squared_distance(items[i], items[j]);
        if (d2 < best) {
          best = d2;
          nn[i] = j;
        }
      }
    }

    // Union i with its first neighbour; the shared-neighbour adjacency rule
    // follows transitively, so components match the full linkage graph.
    std::vector<std::size_t> parent(m);
    for (std::size_t i = 0; i < m; ++i) parent[i] = i;
    auto find = [&parent](std::size_t x) {
      while (parent[x] != x) {
        parent[x] = parent[parent[x]];
        x = parent[x];
      }
      return x;
    };
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t a = find(i), b = find(nn[i]);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }

    std::vector<int> item_label(m, -1);
    int next = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t root = find(i);
      if (item_label[root] < 0) item_label[root] = next++;
      item_label[i] = item_label[root];
    }

    std::vector<int> partition(n);
    for (std::size_t p = 0; p < n; ++p) partition[p] = item_label[membership[p]];
    partitions.push_back(partition);
    if (next == 1) break;

    // Next level clusters the means of the original members of each cluster.
    const std::size_t d = points.front().size();
    std::vector<Vec> means(next, Vec(d, 0.0));
    std::vector<std::size_t> counts(next, 0);
    for (std::size_t p = 0; p < n; ++p) {
      axpy(1.0, points[p], means[partition[p]]);
      ++counts[partition[p]];
    }
    for (int c = 0; c < next; ++c) scale(means[c], 1.0 / static_cast<double>(counts[c]));

    items = std::move(means);
    membership = partition;
  }
  return partitions;
}

std::vector<int> select_partition(const std::vector<std::vector<int>>& partitions, int k) {
  if (partitions.empty()) {
    throw Error(ErrorKind::kConfigError, "no partitions to select from");
  }
  std::size_t best = 0;
  std::size_t best_count = partition_cluster_count(partitions[0]);
  for (std::size_t i = 1; i < partitions.size(); ++i) {
    const std::size_t count = partition_cluster_count(partitions[i]);
    const long long target = k;
    const long long gap = std::llabs(static_cast<long long>(count) - target);
    const long long best_gap = std::llabs(static_cast<long long>(best_count) - target);
    if (gap < best_gap || (gap == best_gap && count > best_count)) {
      best = i;
      best_count = count;
    }
  }
  return partitions[best];
}

KEstimate estimate_class_number(const std::vector<LabeledEmbedding>& known,
                                const std::vector<Vec>& working, int k_min,
                                int k_max, std::uint64_t seed) {
  if (k_min < 1 || k_max < k_min) {
    throw Error(ErrorKind::kConfigError, "need 1 <= k_min <= k_max");
  }
  check_points(working, "class number estimation");

  std::map<int, std::vector<const Vec*>> by_class;
  for (const LabeledEmbedding& e : known) by_class[e.class_id].push_back(&e.vector);
  if (by_class.size() < 2) {
    throw Error(ErrorKind::kInsufficientKnownClasses,
                "estimation needs at least two known classes");
  }
  for (const auto& [cls, members] : by_class) {
    if (members.size() < 2) {
      throw Error(ErrorKind::kInsufficientKnownClasses,
                  "every known class needs at least two samples");
    }
  }

  // Lower-id half of the classes stays labeled; the upper half is pooled
  // with the working set and must be re-discovered.
  const std::size_t m = by_class.size();
  const std::size_t n_train = (m + 1) / 2;
  std::vector<LabeledEmbedding> probe_train;
  std::vector<Vec> pool;
  std::vector<int> held_out_labels;
  std::size_t cls_index = 0;
  for (const auto& [cls, members] : by_class) {
    if (cls_index++ < n_train) {
      for (const Vec* v : members) probe_train.push_back({cls, *v});
    } else {
      for (const Vec* v : members) {
        pool.push_back(*v);
        held_out_labels.push_back(cls);
      }
    }
  }
  const std::size_t n_held_out = pool.size();
  const int n_val_classes = static_cast<int>(m - n_train);
  pool.insert(pool.end(), working.begin(), working.end());

  // Held-out accuracy alone saturates for every k at or below the true count
  // (merging clusters never splits a held-out class), so each candidate is
  // also scored by the silhouette width of the pooled clustering. The
  // distance matrix is shared across candidates; big pools are subsampled.
  std::vector<std::size_t> sil_index(pool.size());
  std::iota(sil_index.begin(), sil_index.end(), std::size_t{0});
  if (sil_index.size() > kSilhouetteCap) {
    Rng rng(seed);
    for (std::size_t i = 0; i < kSilhouetteCap; ++i) {
      const std::size_t j = i + rng.index(sil_index.size() - i);
      std::swap(sil_index[i], sil_index[j]);
    }
    sil_index.resize(kSilhouetteCap);
  }
  const std::size_t n_sil = sil_index.size();
  std::vector<double> dist(n_sil * n_sil, 0.0);
  for (std::size_t i = 0; i < n_sil; ++i) {
    for (std::size_t j = i + 1; j < n_sil; ++j) {
      const double d_ij = distance(pool[sil_index[i]], pool[sil_index[j]]);
      dist[i * n_sil + j] = d_ij;
      dist[j * n_sil + i] = d_ij;
    }
  }

  KEstimate estimate;
  estimate.search_range = {k_min, k_max};
  estimate.k_est = k_min;
  double best_score = -1.0;
  std::vector<int> sil_assign(n_sil);
  for (int k = k_min; k <= k_max; ++k) {
    // Independent seeds keep each candidate's initialization uncorrelated.
    const ConstrainedCore core =
        constrained_core(probe_train, pool, k + n_val_classes,
                         seed + static_cast<std::uint64_t>(k), 300, 1e-6);
    clustmetrics::LabelPairing pairing;
    pairing.pred_labels.assign(core.novel_assignments.begin(),
                               core.novel_assignments.begin() + n_held_out);
    pairing.gt_labels = held_out_labels;
    const double acc = clustmetrics::clustering_accuracy(pairing);
    for (std::size_t i = 0; i < n_sil; ++i) {
      sil_assign[i] = core.novel_assignments[sil_index[i]];
    }
    const double sil =
        mean_silhouette(dist, n_sil, sil_assign, k + n_val_classes);
    const double score = 0.5 * (acc + 0.5 * (sil + 1.0));
    estimate.scores_per_k[k] = score;
    if (score > best_score) {
      best_score = score;
      estimate.k_est = k;
    }
  }
  return estimate;
}

}  // namespace opendet::discovery
