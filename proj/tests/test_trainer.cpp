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

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "opendet/error.hpp"
#include "opendet/memory.hpp"
#include "opendet/rng.hpp"
#include "opendet/trainer.hpp"
#include "opendet/vecmath.hpp"

using namespace opendet;
using namespace opendet::trainer;

namespace {

/// Two Gaussian clusters at +/-6 along the first four dimensions.
MemoryBuffer two_cluster_buffer(int per_cluster, int dim, std::uint64_t seed,
                                const std::vector<int>* known_tags = nullptr) {
  Rng rng(seed);
  MemoryBuffer buf;
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < per_cluster; ++i) {
      char id[16];
      std::snprintf(id, sizeof id, "p%04d", c * per_cluster + i);
      ObjectRecord r;
      r.image_id = "im0";
      r.object_id = id;
      r.box = {10.0 * i, 10.0 * c, 5.0, 5.0};
      const int slot = c * per_cluster + i;
      r.tag = known_tags ? ClassTag::known((*known_tags)[static_cast<std::size_t>(slot) %
                                                         known_tags->size()])
                         : ClassTag::unknown();
      r.score = 0.9;
      Vec v(static_cast<std::size_t>(dim));
      for (int d = 0; d < dim; ++d) {
        v[static_cast<std::size_t>(d)] = (d < 4 ? (c ? 6.0 : -6.0) : 0.0) + rng.normal();
      }
      buf.append(r, {id, std::move(v)});
    }
  }
  return buf;
}

}  // namespace

TEST_CASE("init_head is deterministic, bounded, and seed-sensitive") {
  const ProjectionHead a = init_head(64, 32, 5);
  const ProjectionHead b = init_head(64, 32, 5);
  const ProjectionHead c = init_head(64, 32, 6);
  CHECK(a == b);
  CHECK(a.weight != c.weight);
  CHECK(a.d_in == 64);
  CHECK(a.d_out == 32);
  REQUIRE(a.weight.size() == 64 * 32);
  REQUIRE(a.bias.size() == 32);
  const double bound = 1.0 / std::sqrt(64.0);
  for (double w : a.weight) {
    CHECK(w >= -bound);
    CHECK(w < bound);
  }
}

TEST_CASE("encode produces unit vectors with a basis fallback") {
  const ProjectionHead head = init_head(16, 8, 1);
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    Vec f(16);
    for (double& x : f) x = rng.normal();
    const Vec e = encode_one(head, f);
    REQUIRE(e.size() == 8);
    CHECK(std::abs(norm(e) - 1.0) <= 1e-9);
  }

  ProjectionHead zero;
  zero.d_in = 4;
  zero.d_out = 3;
  zero.weight.assign(12, 0.0);
  zero.bias.assign(3, 0.0);
  const Vec e = encode_one(zero, {1.0, 2.0, 3.0, 4.0});
  CHECK(e == Vec{1.0, 0.0, 0.0});
}

TEST_CASE("identity head maps unit vectors to themselves") {
  ProjectionHead id;
  id.d_in = 4;
  id.d_out = 4;
  id.weight.assign(16, 0.0);
  for (int i = 0; i < 4; ++i) id.weight[static_cast<std::size_t>(i * 4 + i)] = 1.0;
  id.bias.assign(4, 0.0);
  const Vec v{0.0, 0.6, 0.8, 0.0};
  const Vec e = encode_one(id, v);
  for (int i = 0; i < 4; ++i) {
    CHECK(e[static_cast<std::size_t>(i)] ==
          doctest::Approx(v[static_cast<std::size_t>(i)]).epsilon(1e-12));
  }
}

TEST_CASE("encode rejects inputs of the wrong width") {
  const ProjectionHead head = init_head(8, 4, 0);
  try {
    encode_one(head, Vec(5, 1.0));
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDimensionMismatch);
  }
}

TEST_CASE("key queue evicts FIFO at capacity") {
  KeyQueue q(3);
  CHECK(q.empty());
  CHECK(q.capacity() == 3);
  for (int i = 0; i < 5; ++i) q.push(Vec{static_cast<double>(i)});
  CHECK(q.size() == 3);
  const auto snap = q.snapshot();
  REQUIRE(snap.size() == 3);
  CHECK(snap[0] == Vec{2.0});  // oldest surviving entry first
  CHECK(snap[1] == Vec{3.0});
  CHECK(snap[2] == Vec{4.0});
}

TEST_CASE("training is bit-deterministic for a fixed seed") {
  const MemoryBuffer buf = two_cluster_buffer(32, 8, 3);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 16;
  cfg.queue_capacity = 64;
  cfg.seed = 9;
  const ProjectionHead head0 = init_head(8, 4, 9);
  const auto [h1, s1] = train(head0, buf, cfg);
  const auto [h2, s2] = train(head0, buf, cfg);
  CHECK(h1 == h2);
  CHECK(s1.epoch_mean_loss == s2.epoch_mean_loss);
  CHECK(s1.final_loss == s2.final_loss);
  REQUIRE(s1.epoch_mean_loss.size() == 3);
}

TEST_CASE("zero learning rate leaves the head untouched") {
  const MemoryBuffer buf = two_cluster_buffer(16, 8, 4);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.learning_rate = 0.0;
  cfg.batch_size = 8;
  cfg.queue_capacity = 32;
  cfg.seed = 5;
  const ProjectionHead head0 = init_head(8, 4, 5);
  const auto [head, stats] = train(head0, buf, cfg);
  CHECK(head == head0);
}

TEST_CASE("training ignores class labels entirely") {
  std::vector<int> tags_a{3, 8};
  std::vector<int> tags_b{12, 1};  // same entries, permuted class labels
  const MemoryBuffer buf_a = two_cluster_buffer(24, 8, 7, &tags_a);
  const MemoryBuffer buf_b = two_cluster_buffer(24, 8, 7, &tags_b);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 16;
  cfg.queue_capacity = 64;
  cfg.seed = 21;
  const ProjectionHead head0 = init_head(8, 4, 21);
  const auto [ha, sa] = train(head0, buf_a, cfg);
  const auto [hb, sb] = train(head0, buf_b, cfg);
  CHECK(ha == hb);
  CHECK(sa.final_loss == sb.final_loss);
}

TEST_CASE("contrastive refinement drives the loss down on two clusters") {
  const MemoryBuffer buf = two_cluster_buffer(128, 16, 3);
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.queue_capacity = 128;
  cfg.temperature = 0.2;
  cfg.learning_rate = 0.015;
  cfg.seed = 11;
  const ProjectionHead head0 = init_head(16, 8, 11);
  const auto [head, stats] = train(head0, buf, cfg);
  REQUIRE(stats.epoch_mean_loss.size() == 50);
  CHECK(stats.final_loss < stats.epoch_mean_loss.front());
}

TEST_CASE("training an empty buffer is an error") {
  TrainConfig cfg;
  const ProjectionHead head0 = init_head(8, 4, 0);
  try {
    train(head0, MemoryBuffer(), cfg);
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kEmptyBuffer);
  }
}

TEST_CASE("head checkpoints round trip bit-exactly") {
  const MemoryBuffer buf = two_cluster_buffer(16, 8, 6);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 8;
  cfg.queue_capacity = 32;
  cfg.seed = 13;
  const auto [head, stats] = train(init_head(8, 4, 13), buf, cfg);

  const std::string path = "/tmp/opendet_test_head.json";
  save_head(head, path);
  const ProjectionHead loaded = load_head(path);
  CHECK(loaded == head);
  std::remove(path.c_str());
}

TEST_CASE("load_head rejects malformed checkpoints") {
  const std::string path = "/tmp/opendet_test_bad_head.json";
  FILE* f = std::fopen(path.c_str(), "w");
  REQUIRE(f != nullptr);
  std::fputs("{\"version\":99,\"d_in\":2,\"d_out\":1,\"weight\":[1,2],\"bias\":[0]}", f);
  std::fclose(f);
  try {
    load_head(path);
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kSchemaMismatch);
  }

  f = std::fopen(path.c_str(), "w");
  REQUIRE(f != nullptr);
  std::fputs("not json at all", f);
  std::fclose(f);
  CHECK_THROWS_AS(load_head(path), Error);
  std::remove(path.c_str());
}
