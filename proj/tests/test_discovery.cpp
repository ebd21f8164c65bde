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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "opendet/clustmetrics.hpp"
#include "opendet/discovery.hpp"
#include "opendet/error.hpp"
#include "opendet/rng.hpp"
#include "opendet/vecmath.hpp"

using namespace opendet;
using namespace opendet::discovery;

namespace {

/// Gaussian blob of n points around the given center.
void add_blob(std::vector<Vec>& out, Rng& rng, const Vec& center, int n,
              double sigma = 1.0) {
  for (int i = 0; i < n; ++i) {
    Vec v = center;
    for (double& x : v) x += sigma * rng.normal();
    out.push_back(std::move(v));
  }
}

std::vector<std::string> make_ids(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("w" + std::to_string(i));
  return ids;
}

bool sorted_equal(std::vector<Vec> a, std::vector<Vec> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

}  // namespace

TEST_CASE("kmeans++ init picks input points deterministically") {
  std::vector<Vec> points{{0.0, 0.0}, {10.0, 0.0}, {0.0, 10.0}, {10.0, 10.0}};
  const auto once = kmeans_pp_init(points, 2, 42);
  const auto again = kmeans_pp_init(points, 2, 42);
  CHECK(once == again);
  for (const Vec& c : once) {
    CHECK(std::find(points.begin(), points.end(), c) != points.end());
  }

  const auto single = kmeans_pp_init(points, 1, 0);
  REQUIRE(single.size() == 1);
  CHECK(std::find(points.begin(), points.end(), single[0]) != points.end());
}

TEST_CASE("kmeans++ with k = n returns a permutation of distinct points") {
  Rng rng(3);
  std::vector<Vec> points;
  for (int i = 0; i < 12; ++i) points.push_back({rng.uniform(0, 100), rng.uniform(0, 100)});
  const auto centroids = kmeans_pp_init(points, 12, 7);
  CHECK(sorted_equal(centroids, points));
}

TEST_CASE("kmeans++ falls back to uniform draws when all points coincide") {
  std::vector<Vec> points(6, Vec{3.0, 3.0});
  const auto centroids = kmeans_pp_init(points, 3, 1);
  REQUIRE(centroids.size() == 3);
  for (const Vec& c : centroids) CHECK(c == Vec{3.0, 3.0});
}

TEST_CASE("kmeans++ rejects impossible requests") {
  std::vector<Vec> points{{0.0}, {1.0}};
  CHECK_THROWS_AS(kmeans_pp_init(points, 3, 0), Error);
  CHECK_THROWS_AS(kmeans_pp_init(points, 0, 0), Error);
  CHECK_THROWS_AS(kmeans_pp_init({}, 1, 0), Error);
}

TEST_CASE("kmeans: one point per cluster reaches zero inertia") {
  std::vector<Vec> points{{0.0, 0.0}, {50.0, 0.0}, {0.0, 50.0}};
  const KmeansResult r = kmeans(points, 3, kmeans_pp_init(points, 3, 0));
  CHECK(r.inertia == 0.0);
  std::set<int> used(r.assignments.begin(), r.assignments.end());
  CHECK(used.size() == 3);
}

TEST_CASE("kmeans recovers two separated pairs with hand-computed inertia") {
  std::vector<Vec> points{{0.0, 0.0}, {2.0, 0.0}, {100.0, 0.0}, {102.0, 0.0}};
  const KmeansResult r = kmeans(points, 2, {{1.0, 0.0}, {101.0, 0.0}});
  CHECK(r.assignments[0] == r.assignments[1]);
  CHECK(r.assignments[2] == r.assignments[3]);
  CHECK(r.assignments[0] != r.assignments[2]);
  // each point sits one unit from its pair centroid
  CHECK(r.inertia == doctest::Approx(4.0));
}

TEST_CASE("kmeans honors max_iter and reports a non-increasing history") {
  Rng rng(5);
  std::vector<Vec> points;
  add_blob(points, rng, {0.0, 0.0}, 40);
  add_blob(points, rng, {8.0, 0.0}, 40);
  add_blob(points, rng, {0.0, 8.0}, 40);

  const KmeansResult one = kmeans(points, 3, kmeans_pp_init(points, 3, 2), 1);
  CHECK(one.iterations_run == 1);

  const KmeansResult full = kmeans(points, 3, kmeans_pp_init(points, 3, 2));
  REQUIRE(!full.inertia_history.empty());
  for (std::size_t i = 1; i < full.inertia_history.size(); ++i) {
    CHECK(full.inertia_history[i] <= full.inertia_history[i - 1] + 1e-9);
  }
  CHECK(full.inertia <= full.inertia_history.front() + 1e-9);
}

TEST_CASE("kmeans validates its inputs") {
  std::vector<Vec> points{{0.0}, {1.0}, {2.0}};
  CHECK_THROWS_AS(kmeans(points, 2, {{0.0}}), Error);  // init size != k
  CHECK_THROWS_AS(kmeans(points, 0, {}), Error);
  CHECK_THROWS_AS(kmeans(points, 2, {{0.0}, {1.0}}, 0), Error);      // max_iter
  CHECK_THROWS_AS(kmeans(points, 2, {{0.0}, {1.0}}, 10, -1.0), Error);  // tol
}

TEST_CASE("constrained k-means with one novel cluster labels everything zero") {
  Rng rng(11);
  std::vector<Vec> working;
  add_blob(working, rng, {5.0, 5.0}, 20);
  const auto ids = make_ids(working.size());
  const DiscoveryResult r = constrained_kmeans({}, working, ids, 1, 0);
  REQUIRE(r.assignments.size() == 20);
  for (const auto& [id, cat] : r.assignments) CHECK(cat == 0);
  CHECK(r.novel_centroids.size() == 1);
  CHECK(r.known_centroids.empty());
}

TEST_CASE("constrained k-means separates two working blobs beside two known classes") {
  Rng rng(13);
  std::vector<LabeledEmbedding> known;
  std::vector<Vec> blob;
  add_blob(blob, rng, {0.0, 0.0}, 15, 0.3);
  for (const Vec& v : blob) known.push_back({0, v});
  blob.clear();
  add_blob(blob, rng, {10.0, 0.0}, 15, 0.3);
  for (const Vec& v : blob) known.push_back({1, v});

  std::vector<Vec> working;
  add_blob(working, rng, {0.0, 10.0}, 20, 0.3);
  add_blob(working, rng, {10.0, 10.0}, 20, 0.3);
  const auto ids = make_ids(working.size());

  const DiscoveryResult r = constrained_kmeans(known, working, ids, 2, 3);
  std::vector<int> pred, truth;
  for (std::size_t i = 0; i < working.size(); ++i) {
    pred.push_back(r.assignments.at(ids[i]));
    truth.push_back(i < 20 ? 0 : 1);
  }
  CHECK(clustmetrics::clustering_accuracy({pred, truth}) == 1.0);
  CHECK(r.known_centroids.size() == 2);
  CHECK(r.novel_centroids.size() == 2);
}

TEST_CASE("labeled points stay in their class cluster wherever they sit") {
  // Three class-0 points near the origin plus one stray beside a working
  // blob: the stray keeps feeding the class-0 centroid, pulling it to the
  // four-point mean. Without the hard constraint the centroid would stay at
  // the origin cluster.
  std::vector<LabeledEmbedding> known{
      {0, {0.0, 0.0}}, {0, {0.2, 0.0}}, {0, {0.0, 0.2}}, {0, {100.0, 100.0}}};
  Rng rng(17);
  std::vector<Vec> working;
  add_blob(working, rng, {100.0, 100.0}, 12, 0.2);
  const auto ids = make_ids(working.size());
  const DiscoveryResult r = constrained_kmeans(known, working, ids, 1, 5);
  REQUIRE(r.known_centroids.size() == 1);
  CHECK(r.known_centroids[0][0] == doctest::Approx(25.05).epsilon(1e-6));
  CHECK(r.known_centroids[0][1] == doctest::Approx(25.05).epsilon(1e-6));
}

TEST_CASE("constrained k-means with no known classes matches plain kmeans") {
  Rng rng(19);
  std::vector<Vec> working;
  add_blob(working, rng, {0.0, 0.0}, 30);
  add_blob(working, rng, {12.0, 0.0}, 30);
  add_blob(working, rng, {0.0, 12.0}, 30);
  const auto ids = make_ids(working.size());

  const std::uint64_t seed = 23;
  const DiscoveryResult constrained = constrained_kmeans({}, working, ids, 3, seed);
  const KmeansResult plain =
      kmeans(working, 3, kmeans_pp_init(working, 3, seed));
  for (std::size_t i = 0; i < working.size(); ++i) {
    CHECK(constrained.assignments.at(ids[i]) == plain.assignments[i]);
  }
  CHECK(constrained.inertia == doctest::Approx(plain.inertia));
}

TEST_CASE("constrained k-means covers every working object exactly once") {
  Rng rng(29);
  std::vector<Vec> working;
  add_blob(working, rng, {0.0, 0.0}, 25);
  add_blob(working, rng, {9.0, 0.0}, 25);
  std::vector<LabeledEmbedding> known;
  std::vector<Vec> blob;
  add_blob(blob, rng, {0.0, 9.0}, 10);
  for (const Vec& v : blob) known.push_back({4, v});

  const auto ids = make_ids(working.size());
  const DiscoveryResult r = constrained_kmeans(known, working, ids, 2, 31);
  REQUIRE(r.assignments.size() == working.size());
  for (const std::string& id : ids) {
    REQUIRE(r.assignments.count(id) == 1);
    const int cat = r.assignments.at(id);
    CHECK(cat >= 0);
    CHECK(cat < 2);
  }
}

TEST_CASE("constrained k-means input validation") {
  std::vector<Vec> working{{0.0}, {1.0}};
  CHECK_THROWS_AS(constrained_kmeans({}, working, make_ids(2), 3, 0), Error);
  CHECK_THROWS_AS(constrained_kmeans({}, {}, {}, 1, 0), Error);
  CHECK_THROWS_AS(constrained_kmeans({}, working, {"a"}, 1, 0), Error);
  try {
    constrained_kmeans({}, working, {"a", "a"}, 1, 0);
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDuplicateId);
  }
}

TEST_CASE("finch: two tight pairs far apart form two first-level clusters") {
  std::vector<Vec> points{{0.0, 0.0}, {0.5, 0.0}, {100.0, 0.0}, {100.5, 0.0}};
  const auto levels = finch(points);
  REQUIRE(!levels.empty());
  const auto& first = levels.front();
  CHECK(first[0] == first[1]);
  CHECK(first[2] == first[3]);
  CHECK(first[0] != first[2]);
  std::set<int> distinct(first.begin(), first.end());
  CHECK(distinct.size() == 2);
}

TEST_CASE("finch: two points collapse immediately") {
  const auto levels = finch({{0.0}, {5.0}});
  REQUIRE(levels.size() == 1);
  CHECK(levels[0][0] == levels[0][1]);
}

TEST_CASE("finch levels strictly decrease and form a chain") {
  Rng rng(37);
  std::vector<Vec> points;
  add_blob(points, rng, {0.0, 0.0}, 30);
  add_blob(points, rng, {15.0, 0.0}, 30);
  add_blob(points, rng, {0.0, 15.0}, 30);
  const auto levels = finch(points);
  REQUIRE(!levels.empty());

  std::size_t prev_count = points.size() + 1;
  for (const auto& level : levels) {
    std::set<int> distinct(level.begin(), level.end());
    CHECK(distinct.size() < prev_count);
    prev_count = distinct.size();
  }
  CHECK(prev_count == 1);  // coarsest level is a single cluster

  for (std::size_t l = 0; l + 1 < levels.size(); ++l) {
    std::map<int, int> refine_to_coarse;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto [it, fresh] =
          refine_to_coarse.emplace(levels[l][i], levels[l + 1][i]);
      CHECK(it->second == levels[l + 1][i]);  // whole fine cluster moves together
    }
  }
}

TEST_CASE("finch needs at least two points") {
  CHECK_THROWS_AS(finch({{1.0}}), Error);
  CHECK_THROWS_AS(finch({}), Error);
}

TEST_CASE("select_partition picks the closest level, finer on ties") {
  const std::vector<std::vector<int>> levels{
      // 4 clusters, 2 clusters, 1 cluster over six points
      {0, 1, 2, 3, 0, 1},
      {0, 0, 1, 1, 0, 0},
      {0, 0, 0, 0, 0, 0},
  };
  CHECK(select_partition(levels, 2) == levels[1]);
  CHECK(select_partition(levels, 4) == levels[0]);
  CHECK(select_partition(levels, 40) == levels[0]);
  CHECK(select_partition(levels, 3) == levels[0]);  // tie 4 vs 2 goes finer
  CHECK(select_partition({levels[1]}, 99) == levels[1]);
}

TEST_CASE("class-number estimation recovers four separated blobs") {
  Rng rng(41);
  std::vector<LabeledEmbedding> known;
  std::vector<Vec> blob;
  const std::vector<Vec> known_centers{{20.0, 0.0, 0.0}, {0.0, 20.0, 0.0},
                                       {0.0, 0.0, 20.0}};
  for (std::size_t c = 0; c < known_centers.size(); ++c) {
    blob.clear();
    add_blob(blob, rng, known_centers[c], 30);
    for (const Vec& v : blob) known.push_back({static_cast<int>(c), v});
  }
  std::vector<Vec> working;
  add_blob(working, rng, {20.0, 20.0, 0.0}, 30);
  add_blob(working, rng, {20.0, 0.0, 20.0}, 30);
  add_blob(working, rng, {0.0, 20.0, 20.0}, 30);
  add_blob(working, rng, {20.0, 20.0, 20.0}, 30);

  const KEstimate est = estimate_class_number(known, working, 2, 8, 1);
  CHECK(est.k_est == 4);
  CHECK(est.scores_per_k.size() == 7);
  CHECK(est.search_range.first == 2);
  CHECK(est.search_range.second == 8);
}

TEST_CASE("degenerate single-candidate range returns that candidate") {
  Rng rng(43);
  std::vector<LabeledEmbedding> known;
  std::vector<Vec> blob;
  add_blob(blob, rng, {10.0, 0.0}, 10);
  for (const Vec& v : blob) known.push_back({0, v});
  blob.clear();
  add_blob(blob, rng, {0.0, 10.0}, 10);
  for (const Vec& v : blob) known.push_back({1, v});
  std::vector<Vec> working;
  add_blob(working, rng, {10.0, 10.0}, 10);

  const KEstimate est = estimate_class_number(known, working, 3, 3, 0);
  CHECK(est.k_est == 3);
  REQUIRE(est.scores_per_k.size() == 1);
  CHECK(est.scores_per_k.count(3) == 1);
}

TEST_CASE("estimation preconditions") {
  std::vector<Vec> working{{0.0}, {1.0}};
  std::vector<LabeledEmbedding> one_class{{0, {0.0}}, {0, {1.0}}};
  try {
    estimate_class_number(one_class, working, 2, 4, 0);
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInsufficientKnownClasses);
  }

  std::vector<LabeledEmbedding> thin{{0, {0.0}}, {0, {1.0}}, {1, {5.0}}};
  CHECK_THROWS_AS(estimate_class_number(thin, working, 2, 4, 0), Error);
  std::vector<LabeledEmbedding> fine{
      {0, {0.0}}, {0, {1.0}}, {1, {5.0}}, {1, {6.0}}};
  CHECK_THROWS_AS(estimate_class_number(fine, working, 4, 2, 0), Error);
  CHECK_THROWS_AS(estimate_class_number(fine, {}, 2, 4, 0), Error);
}
