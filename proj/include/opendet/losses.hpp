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

#ifndef OPENDET_LOSSES_HPP_
#define OPENDET_LOSSES_HPP_

#include <vector>

#include "opendet/vecmath.hpp"

namespace opendet::losses {

/// Per-class prototype vectors with the hinge margin applied to other classes.
struct PrototypeSet {
  std::vector<Vec> prototypes;  // one per known class, shared dimension
  double margin = 15.0;         // hinge margin against non-own prototypes
};

/// One contrastive sample: query, its positive key, and queued negatives.
struct ContrastiveBatch {
  Vec query;
  Vec positive_key;
  std::vector<Vec> negative_keys;
  double temperature = 1.0;
};

/// Mixing weights for the combined region-level training objective.
struct LossWeights {
  double alpha_pcl = 1.0;
  double alpha_cls = 1.0;
  double alpha_reg = 1.0;
};

/// Loss value plus exact analytic gradients for every input vector.
struct InfoNceResult {
  double loss = 0.0;
  Vec grad_query;
  Vec grad_positive_key;
  std::vector<Vec> grad_negative_keys;
};

struct MixedView {
  Vec mixed;
  int virtual_label = 0;  // 1 iff the view mixes a query with its own key
};

/// Pull-toward-own, push-from-others prototype loss:
///   l = ||f - p_c|| + sum_{i != c} max(0, margin - ||f - p_i||).
double prototype_loss(const Vec& feature, int class_index, const PrototypeSet& protos);

/// Exponential moving average of class prototypes toward batch class means:
/// p <- m*p + (1-m)*mean(features with that label); classes absent from the
/// batch are left untouched.
PrototypeSet update_prototypes(const PrototypeSet& protos,
                               const std::vector<Vec>& batch_features,
                               const std::vector<int>& batch_labels, double momentum);

/// alpha_pcl*l_pcl + alpha_cls*l_cls + alpha_reg*l_reg.
double roi_total_loss(double l_pcl, double l_cls, double l_reg, const LossWeights& w);

/// Contrastive loss -log(exp(q.k+/tau) / (exp(q.k+/tau) + sum exp(q.k-/tau)))
/// in log-sum-exp-stabilized form, with analytic gradients for q, k+, and
/// every negative key.
InfoNceResult info_nce(const ContrastiveBatch& batch);

/// Loss plus the query gradient only — same math as info_nce without
/// materializing per-negative gradients. Used by inner training loops.
double info_nce_loss_grad_q(const ContrastiveBatch& batch, Vec& grad_query);

/// mixed = lambda*q_input + (1-lambda)*k_input; the virtual label is 1 only
/// when the pair is a query and its own positive key.
MixedView mixup_view(const Vec& q_input, const Vec& k_input, double lambda,
                     bool same_instance);

}  // namespace opendet::losses

#endif  // OPENDET_LOSSES_HPP_
