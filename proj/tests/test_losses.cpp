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
#include <vector>

#include "opendet/error.hpp"
#include "opendet/losses.hpp"
#include "opendet/rng.hpp"

using namespace opendet;
using namespace opendet::losses;

namespace {

ContrastiveBatch random_batch(Rng& rng, std::size_t d, std::size_t n_neg,
                              double temperature) {
  auto draw = [&] {
    Vec v(d);
    for (double& x : v) x = rng.normal();
    return v;
  };
  ContrastiveBatch batch;
  batch.query = draw();
  batch.positive_key = draw();
  for (std::size_t i = 0; i < n_neg; ++i) batch.negative_keys.push_back(draw());
  batch.temperature = temperature;
  return batch;
}

/// Central finite difference of the batch loss along one coordinate of one
/// vector, step 1e-4.
double numeric_grad(ContrastiveBatch batch, Vec& target, std::size_t i) {
  const double step = 1e-4;
  const double saved = target[i];
  target[i] = saved + step;
  const double up = info_nce(batch).loss;
  target[i] = saved - step;
  const double down = info_nce(batch).loss;
  target[i] = saved;
  return (up - down) / (2.0 * step);
}

bool close_rel(double analytic, double numeric, double tol) {
  return std::abs(analytic - numeric) <= tol * std::max(1.0, std::abs(analytic) + std::abs(numeric));
}

}  // namespace

TEST_CASE("prototype loss: pull distance plus hinge on the rival") {
  // Own prototype at distance 2, rival at distance 10, margin 15:
  // 2 + max(0, 15 - 10) = 7.
  PrototypeSet protos;
  protos.prototypes = {{2.0}, {10.0}};
  protos.margin = 15.0;
  CHECK(prototype_loss({0.0}, 0, protos) == 7.0);

  // Rival beyond the margin contributes nothing.
  protos.prototypes = {{2.0}, {100.0}};
  CHECK(prototype_loss({0.0}, 0, protos) == 2.0);
}

TEST_CASE("prototype loss validates inputs") {
  PrototypeSet protos;
  protos.prototypes = {{0.0}, {1.0}};
  CHECK_THROWS_AS(prototype_loss({0.0}, 5, protos), Error);
  protos.margin = 0.0;
  CHECK_THROWS_AS(prototype_loss({0.0}, 0, protos), Error);
  protos.margin = 15.0;
  protos.prototypes = {{0.0}, {1.0, 2.0}};
  CHECK_THROWS_AS(prototype_loss({0.0}, 0, protos), Error);
}

TEST_CASE("prototype update moves halfway at momentum 0.5") {
  PrototypeSet protos;
  protos.prototypes = {{0.0, 0.0}, {5.0, 5.0}};
  const std::vector<Vec> feats{{2.0, 2.0}};
  const std::vector<int> labels{0};
  const PrototypeSet next = update_prototypes(protos, feats, labels, 0.5);
  CHECK(next.prototypes[0] == Vec{1.0, 1.0});
  CHECK(next.prototypes[1] == Vec{5.0, 5.0});  // absent class untouched
}

TEST_CASE("prototype update averages all batch members of a class") {
  PrototypeSet protos;
  protos.prototypes = {{0.0}};
  const PrototypeSet next =
      update_prototypes(protos, {{1.0}, {3.0}}, {0, 0}, 0.0);
  CHECK(next.prototypes[0] == Vec{2.0});  // momentum 0: jump to the mean

  CHECK_THROWS_AS(update_prototypes(protos, {{1.0}}, {0}, 1.5), Error);
  CHECK_THROWS_AS(update_prototypes(protos, {{1.0}}, {7}, 0.5), Error);
  CHECK_THROWS_AS(update_prototypes(protos, {{1.0}}, {0, 0}, 0.5), Error);
}

TEST_CASE("roi total loss is the weighted sum") {
  LossWeights w;
  w.alpha_pcl = 0.5;
  w.alpha_cls = 1.0;
  w.alpha_reg = 2.0;
  CHECK(roi_total_loss(2.0, 1.0, 1.0, w) == 4.0);
  w.alpha_reg = -1.0;
  CHECK_THROWS_AS(roi_total_loss(1.0, 1.0, 1.0, w), Error);
}

TEST_CASE("info_nce on orthogonal logits equals ln(1+K)") {
  for (std::size_t n_neg : {1, 4, 32}) {
    ContrastiveBatch batch;
    batch.query = {1.0, 0.0, 0.0, 0.0};
    batch.positive_key = {0.0, 1.0, 0.0, 0.0};
    for (std::size_t i = 0; i < n_neg; ++i) {
      batch.negative_keys.push_back({0.0, 0.0, 1.0, 0.0});
    }
    batch.temperature = 1.0;
    const InfoNceResult r = info_nce(batch);
    CHECK(std::abs(r.loss - std::log(1.0 + static_cast<double>(n_neg))) <= 1e-12);
  }
}

TEST_CASE("info_nce rewards an aligned positive") {
  ContrastiveBatch batch;
  batch.query = {1.0, 0.0};
  batch.positive_key = {1.0, 0.0};
  batch.negative_keys = {{-1.0, 0.0}};
  batch.temperature = 0.5;
  const InfoNceResult r = info_nce(batch);
  // logits 2 and -2: loss = ln(1 + e^-4)
  CHECK(r.loss == doctest::Approx(std::log(1.0 + std::exp(-4.0))).epsilon(1e-12));
}

TEST_CASE("info_nce validates the batch") {
  ContrastiveBatch batch;
  batch.query = {1.0};
  batch.positive_key = {1.0};
  CHECK_THROWS_AS(info_nce(batch), Error);  // no negatives
  batch.negative_keys = {{1.0}};
  batch.temperature = 0.0;
  CHECK_THROWS_AS(info_nce(batch), Error);  // bad temperature
  batch.temperature = 1.0;
  batch.positive_key = {1.0, 2.0};
  CHECK_THROWS_AS(info_nce(batch), Error);  // dim mismatch
}

TEST_CASE("info_nce analytic gradients match central differences") {
  Rng rng(71);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t d = 2 + rng.index(15);
    const std::size_t n_neg = 1 + rng.index(32);
    const double tau = rng.uniform(0.2, 2.0);
    ContrastiveBatch batch = random_batch(rng, d, n_neg, tau);
    const InfoNceResult r = info_nce(batch);

    for (std::size_t i = 0; i < d; ++i) {
      CHECK(close_rel(r.grad_query[i], numeric_grad(batch, batch.query, i), 1e-5));
      CHECK(close_rel(r.grad_positive_key[i],
                      numeric_grad(batch, batch.positive_key, i), 1e-5));
    }
    for (std::size_t k = 0; k < n_neg; ++k) {
      for (std::size_t i = 0; i < d; ++i) {
        CHECK(close_rel(r.grad_negative_keys[k][i],
                        numeric_grad(batch, batch.negative_keys[k], i), 1e-5));
      }
    }
  }
}

TEST_CASE("lean query-gradient path agrees with the full computation") {
  Rng rng(73);
  for (int trial = 0; trial < 50; ++trial) {
    const ContrastiveBatch batch = random_batch(rng, 8, 6, 0.7);
    const InfoNceResult full = info_nce(batch);
    Vec grad_q;
    const double loss = info_nce_loss_grad_q(batch, grad_q);
    CHECK(loss == doctest::Approx(full.loss).epsilon(1e-15));
    REQUIRE(grad_q.size() == full.grad_query.size());
    for (std::size_t i = 0; i < grad_q.size(); ++i) {
      CHECK(grad_q[i] == doctest::Approx(full.grad_query[i]).epsilon(1e-15));
    }
  }
}

TEST_CASE("mixup interpolates and flags same-instance pairs") {
  const MixedView mid = mixup_view({0.0, 2.0}, {2.0, 0.0}, 0.5, true);
  CHECK(mid.mixed == Vec{1.0, 1.0});
  CHECK(mid.virtual_label == 1);

  const MixedView ends = mixup_view({0.0, 2.0}, {2.0, 0.0}, 1.0, false);
  CHECK(ends.mixed == Vec{0.0, 2.0});
  CHECK(ends.virtual_label == 0);

  CHECK_THROWS_AS(mixup_view({0.0}, {1.0, 2.0}, 0.5, true), Error);
  CHECK_THROWS_AS(mixup_view({0.0}, {1.0}, 1.5, true), Error);
}
