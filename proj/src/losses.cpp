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

#include "opendet/losses.hpp"

#include <algorithm>
#include <cmath>

#include "opendet/error.hpp"

namespace opendet::losses {

namespace {

void check_batch(const ContrastiveBatch& batch) {
  if (batch.temperature <= 0.0) {
    throw Error(ErrorKind::kConfigError, "temperature must be positive");
  }
  if (batch.negative_keys.empty()) {
    throw Error(ErrorKind::kConfigError, "contrastive batch needs at least one negative key");
  }
  const std::size_t d = batch.query.size();
  if (d == 0 || batch.positive_key.size() != d) {
    throw Error(ErrorKind::kDimensionMismatch, "query/positive key dimension mismatch");
  }
  for (const Vec& k : batch.negative_keys) {
    if (k.size() != d) {
      throw Error(ErrorKind::kDimensionMismatch, "negative key dimension mismatch");
    }
  }
}

/// Softmax over the logits [q.k+ , q.k-_1, ...]/tau and the stabilized loss.
/// probs[0] belongs to the positive key.
double softmax_and_loss(const ContrastiveBatch& batch, std::vector<double>& probs) {
  const std::size_t n = 1 + batch.negative_keys.size();
  std::vector<double> logits(n);
  logits[0] = dot(batch.query, batch.positive_key) / batch.temperature;
  for (std::size_t i = 0; i < batch.negative_keys.size(); ++i) {
    logits[i + 1] = dot(batch.query, batch.negative_keys[i]) / batch.temperature;
  }

  const double peak = *std::max_element(logits.begin(), logits.end());
  double denom = 0.0;
  probs.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    probs[i] = std::exp(logits[i] - peak);
    denom += probs[i];
  }
  for (double& p : probs) p /= denom;

  // loss = -logit_0 + logsumexp(logits) = -(logit_0 - peak) + log(denom).
  return std::log(denom) - (logits[0] - peak);
}

}  // namespace

double prototype_loss(const Vec& feature, int class_index, const PrototypeSet& protos) {
  if (class_index < 0 || class_index >= static_cast<int>(protos.prototypes.size())) {
    throw Error(ErrorKind::kInvalidClass, "prototype index out of range");
  }
  if (protos.margin <= 0.0) {
    throw Error(ErrorKind::kConfigError, "prototype margin must be positive");
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < protos.prototypes.size(); ++i) {
    const Vec& p = protos.prototypes[i];
    if (p.size() != feature.size()) {
      throw Error(ErrorKind::kDimensionMismatch, "feature/prototype dimension mismatch");
    }
    const double dist = distance(feature, p);
    if (static_cast<int>(i) == class_index) {
      loss += dist;
    } else {
      loss += std::max(0.0, protos.margin - dist);
    }
  }
  return loss;
}

PrototypeSet update_prototypes(const PrototypeSet& protos,
                               const std::vector<Vec>& batch_features,
                               const std::vector<int>& batch_labels, double momentum) {
  if (momentum < 0.0 || momentum > 1.0) {
    throw Error(ErrorKind::kConfigError, "prototype momentum must lie in [0,1]");
  }
  if (batch_features.size() != batch_labels.size()) {
    throw Error(ErrorKind::kConfigError, "feature/label count mismatch");
  }

  const std::size_t n_classes = protos.prototypes.size();
  std::vector<Vec> sums(n_classes);
  std::vector<std::size_t> counts(n_classes, 0);
  for (std::size_t i = 0; i < batch_features.size(); ++i) {
    const int label = batch_labels[i];
    if (label < 0 || label >= static_cast<int>(n_classes)) {
      throw Error(ErrorKind::kInvalidClass, "batch label out of prototype range");
    }
    if (batch_features[i].size() != protos.prototypes[label].size()) {
      throw Error(ErrorKind::kDimensionMismatch, "batch feature dimension mismatch");
    }
    if (counts[label] == 0) {
      sums[label] = batch_features[i];
    } else {
      axpy(1.0, batch_features[i], sums[label]);
    }
    ++counts[label];
  }

  PrototypeSet out = protos;
  for (std::size_t c = 0; c < n_classes; ++c) {
    if (counts[c] == 0) continue;
    scale(sums[c], 1.0 / static_cast<double>(counts[c]));
    Vec& p = out.prototypes[c];
    for (std::size_t j = 0; j < p.size(); ++j) {
      p[j] = momentum * p[j] + (1.0 - momentum) * sums[c][j];
    }
  }
  return out;
}

double roi_total_loss(double l_pcl, double l_cls, double l_reg, const LossWeights& w) {
  if (w.alpha_pcl < 0.0 || w.alpha_cls < 0.0 || w.alpha_reg < 0.0) {
    throw Error(ErrorKind::kConfigError, "loss weights must be non-negative");
  }
  return w.alpha_pcl * l_pcl + w.alpha_cls * l_cls + w.alpha_reg * l_reg;
}

InfoNceResult info_nce(const ContrastiveBatch& batch) {
  check_batch(batch);
  std::vector<double> probs;
  InfoNceResult out;
  out.loss = softmax_and_loss(batch, probs);

  // d(loss)/d(logit_0) = probs[0] - 1; d(loss)/d(logit_i) = probs[i].
  // Each logit is (q . key)/tau, so the chain rule spreads probs/tau onto
  // the participating vectors.
  const double inv_tau = 1.0 / batch.temperature;
  const std::size_t d = batch.query.size();

  out.grad_query.assign(d, 0.0);
  axpy((probs[0] - 1.0) * inv_tau, batch.positive_key, out.grad_query);
  for (std::size_t i = 0; i < batch.negative_keys.size(); ++i) {
    axpy(probs[i + 1] * inv_tau, batch.negative_keys[i], out.grad_query);
  }

  out.grad_positive_key.assign(d, 0.0);
  axpy((probs[0] - 1.0) * inv_tau, batch.query, out.grad_positive_key);

  out.grad_negative_keys.assign(batch.negative_keys.size(), Vec(d, 0.0));
  for (std::size_t i = 0; i < batch.negative_keys.size(); ++i) {
    axpy(probs[i + 1] * inv_tau, batch.query, out.grad_negative_keys[i]);
  }
  return out;
}

double info_nce_loss_grad_q(const ContrastiveBatch& batch, Vec& grad_query) {
  check_batch(batch);
  std::vector<double> probs;
  const double loss = softmax_and_loss(batch, probs);

  const double inv_tau = 1.0 / batch.temperature;
  grad_query.assign(batch.query.size(), 0.0);
  axpy((probs[0] - 1.0) * inv_tau, batch.positive_key, grad_query);
  for (std::size_t i = 0; i < batch.negative_keys.size(); ++i) {
    axpy(probs[i + 1] * inv_tau, batch.negative_keys[i], grad_query);
  }
  return loss;
}

MixedView mixup_view(const Vec& q_input, const Vec& k_input, double lambda,
                     bool same_instance) {
  if (q_input.size() != k_input.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "mixup inputs differ in dimension");
  }
  if (lambda < 0.0 || lambda > 1.0) {
    throw Error(ErrorKind::kConfigError, "mixup lambda must lie in [0,1]");
  }
  MixedView view;
  view.mixed.resize(q_input.size());
  for (std::size_t j = 0; j < q_input.size(); ++j) {
    view.mixed[j] = lambda * q_input[j] + (1.0 - lambda) * k_input[j];
  }
  view.virtual_label = same_instance ? 1 : 0;
  return view;
}

}  // namespace opendet::losses
