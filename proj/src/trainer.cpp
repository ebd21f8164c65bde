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

#include "opendet/trainer.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "opendet/error.hpp"
#include "opendet/losses.hpp"
#include "opendet/rng.hpp"

namespace opendet::trainer {

namespace {

constexpr double kNormFloor = 1e-12;
constexpr double kJitterScale = 0.05;  // jitter sigma = 0.05 * per-dim std
constexpr double kDropoutRate = 0.1;

void check_config(const TrainConfig& cfg) {
  if (cfg.epochs < 1 || cfg.batch_size < 1 || cfg.queue_capacity < 1) {
    throw Error(ErrorKind::kConfigError, "epochs, batch size, and queue capacity must be positive");
  }
  if (cfg.learning_rate < 0.0 || cfg.sgd_momentum < 0.0 || cfg.sgd_momentum > 1.0) {
    throw Error(ErrorKind::kConfigError, "learning rate must be >= 0 and momentum in [0,1]");
  }
  if (cfg.temperature <= 0.0 || cfg.mix_alpha <= 0.0) {
    throw Error(ErrorKind::kConfigError, "temperature and mix alpha must be positive");
  }
  if (cfg.key_momentum < 0.0 || cfg.key_momentum >= 1.0) {
    throw Error(ErrorKind::kConfigError, "key momentum must lie in [0,1)");
  }
}

/// W*x + b without normalization.
Vec forward(const ProjectionHead& head, const Vec& x) {
  Vec u(head.d_out, 0.0);
  for (std::size_t r = 0; r < head.d_out; ++r) {
    const double* row = head.weight.data() + r * head.d_in;
    double acc = head.bias[r];
    for (std::size_t c = 0; c < head.d_in; ++c) acc += row[c] * x[c];
    u[r] = acc;
  }
  return u;
}

Vec normalize_or_basis(Vec u) {
  const double n = norm(u);
  if (n < kNormFloor) {
    Vec e(u.size(), 0.0);
    if (!e.empty()) e[0] = 1.0;
    return e;
  }
  scale(u, 1.0 / n);
  return u;
}

/// Population standard deviation per dimension, for jitter scaling.
Vec per_dim_std(const std::vector<Vec>& features) {
  const std::size_t d = features.front().size();
  const double n = static_cast<double>(features.size());
  Vec mean(d, 0.0), sq(d, 0.0);
  for (const Vec& f : features) {
    for (std::size_t j = 0; j < d; ++j) {
      mean[j] += f[j];
      sq[j] += f[j] * f[j];
    }
  }
  Vec sd(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    mean[j] /= n;
    const double var = std::max(0.0, sq[j] / n - mean[j] * mean[j]);
    sd[j] = std::sqrt(var);
  }
  return sd;
}

/// Gaussian jitter followed by coordinate dropout. RNG draw order is fixed:
/// d normals, then d uniforms.
Vec augment(const Vec& x, const Vec& sigma, Rng& rng) {
  Vec out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    out[j] = x[j] + kJitterScale * sigma[j] * rng.normal();
  }
  for (std::size_t j = 0; j < out.size(); ++j) {
    if (rng.uniform() < kDropoutRate) out[j] = 0.0;
  }
  return out;
}

}  // namespace

KeyQueue::KeyQueue(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) {
    throw Error(ErrorKind::kConfigError, "key queue capacity must be positive");
  }
}

void KeyQueue::push(Vec key) {
  if (entries_.size() == capacity_) entries_.pop_front();
  entries_.push_back(std::move(key));
}

std::vector<Vec> KeyQueue::snapshot() const {
  return std::vector<Vec>(entries_.begin(), entries_.end());
}

ProjectionHead init_head(std::size_t d_in, std::size_t d_out, std::uint64_t seed) {
  if (d_in == 0 || d_out == 0) {
    throw Error(ErrorKind::kConfigError, "head dimensions must be positive");
  }
  ProjectionHead head;
  head.d_in = d_in;
  head.d_out = d_out;
  head.weight.resize(d_in * d_out);
  head.bias.resize(d_out);

  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(d_in));
  for (double& w : head.weight) w = rng.uniform(-bound, bound);
  for (double& b : head.bias) b = rng.uniform(-bound, bound);
  return head;
}

Vec encode_one(const ProjectionHead& head, const Vec& feature) {
  if (feature.size() != head.d_in) {
    throw Error(ErrorKind::kDimensionMismatch, "feature dimension does not match head input");
  }
  return normalize_or_basis(forward(head, feature));
}

std::vector<Vec> encode(const ProjectionHead& head, const std::vector<Vec>& features) {
  std::vector<Vec> out;
  out.reserve(features.size());
  for (const Vec& f : features) out.push_back(encode_one(head, f));
  return out;
}

std::pair<ProjectionHead, TrainStats> train(const ProjectionHead& head,
                                            const MemoryBuffer& buffer,
                                            const TrainConfig& cfg) {
  check_config(cfg);
  if (buffer.empty()) {
    throw Error(ErrorKind::kEmptyBuffer, "training buffer is empty");
  }
  if (buffer.dim() != static_cast<int>(head.d_in)) {
    throw Error(ErrorKind::kDimensionMismatch, "buffer embeddings do not match head input");
  }

  // Labels are discarded here on purpose: only the vectors participate.
  std::vector<Vec> features;
  features.reserve(buffer.size());
  for (const MemoryEntry& e : buffer.known()) features.push_back(e.embedding.vector);
  for (const MemoryEntry& e : buffer.working()) features.push_back(e.embedding.vector);

  const Vec sigma = per_dim_std(features);
  const std::size_t n = features.size();

  ProjectionHead live = head;
  ProjectionHead key_head = head;
  KeyQueue queue(cfg.queue_capacity);
  Rng rng(cfg.seed);

  std::vector<double> vel_w(live.weight.size(), 0.0);
  Vec vel_b(live.bias.size(), 0.0);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  TrainStats stats;
  losses::ContrastiveBatch nce;
  nce.temperature = cfg.temperature;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t epoch_samples = 0;

    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t end = std::min(n, start + cfg.batch_size);
      const std::size_t batch = end - start;

      // Negatives are frozen per step so samples inside a batch are
      // order-independent; the batch's own keys only join afterwards.
      nce.negative_keys = queue.snapshot();
      const bool has_negatives = !nce.negative_keys.empty();

      std::vector<Vec> inputs(batch), keys(batch);
      std::vector<double> grad_w(live.weight.size(), 0.0);
      Vec grad_b(live.bias.size(), 0.0);

      for (std::size_t s = 0; s < batch; ++s) {
        const Vec& x = features[order[start + s]];
        const Vec q_view = augment(x, sigma, rng);
        const Vec k_view = augment(x, sigma, rng);
        const double lambda_q = rng.beta(cfg.mix_alpha);
        const double lambda_k = rng.beta(cfg.mix_alpha);
        // Both views are mixed within the pair, so each mixed sample still
        // represents its own instance (virtual label 1).
        inputs[s] = losses::mixup_view(q_view, k_view, lambda_q, true).mixed;
        keys[s] = encode_one(key_head,
                             losses::mixup_view(k_view, q_view, lambda_k, true).mixed);

        if (!has_negatives) continue;  // nothing to contrast against yet

        const Vec u = forward(live, inputs[s]);
        const double u_norm = norm(u);
        if (u_norm < kNormFloor) continue;  // basis fallback has no gradient
        Vec q = u;
        scale(q, 1.0 / u_norm);

        nce.query = q;
        nce.positive_key = keys[s];
        Vec grad_q;
        epoch_loss += losses::info_nce_loss_grad_q(nce, grad_q);
        ++epoch_samples;

        // Through the normalization: du = (dq - q (q . dq)) / ||u||.
        const double radial = dot(q, grad_q);
        Vec grad_u(grad_q.size());
        for (std::size_t r = 0; r < grad_u.size(); ++r) {
          grad_u[r] = (grad_q[r] - q[r] * radial) / u_norm;
        }
        for (std::size_t r = 0; r < live.d_out; ++r) {
          double* grow = grad_w.data() + r * live.d_in;
          const Vec& in = inputs[s];
          for (std::size_t c = 0; c < live.d_in; ++c) grow[c] += grad_u[r] * in[c];
          grad_b[r] += grad_u[r];
        }
      }

      if (has_negatives) {
        const double inv_batch = 1.0 / static_cast<double>(batch);
        for (std::size_t i = 0; i < vel_w.size(); ++i) {
          vel_w[i] = cfg.sgd_momentum * vel_w[i] + grad_w[i] * inv_batch;
          live.weight[i] -= cfg.learning_rate * vel_w[i];
        }
        for (std::size_t i = 0; i < vel_b.size(); ++i) {
          vel_b[i] = cfg.sgd_momentum * vel_b[i] + grad_b[i] * inv_batch;
          live.bias[i] -= cfg.learning_rate * vel_b[i];
        }
      }

      for (std::size_t i = 0; i < key_head.weight.size(); ++i) {
        key_head.weight[i] = cfg.key_momentum * key_head.weight[i] +
                             (1.0 - cfg.key_momentum) * live.weight[i];
      }
      for (std::size_t i = 0; i < key_head.bias.size(); ++i) {
        key_head.bias[i] = cfg.key_momentum * key_head.bias[i] +
                           (1.0 - cfg.key_momentum) * live.bias[i];
      }

      for (std::size_t s = 0; s < batch; ++s) queue.push(std::move(keys[s]));
    }

    stats.epoch_mean_loss.push_back(
        epoch_samples > 0 ? epoch_loss / static_cast<double>(epoch_samples) : 0.0);
  }

  stats.final_loss = stats.epoch_mean_loss.back();
  return {std::move(live), std::move(stats)};
}

void save_head(const ProjectionHead& head, const std::string& path) {
  nlohmann::json doc;
  doc["version"] = 1;
  doc["d_in"] = head.d_in;
  doc["d_out"] = head.d_out;
  doc["weight"] = head.weight;
  doc["bias"] = head.bias;
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIoFailure, "cannot open head checkpoint for writing: " + path);
  out << doc.dump() << "\n";
  if (!out) throw Error(ErrorKind::kIoFailure, "failed writing head checkpoint: " + path);
}

ProjectionHead load_head(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIoFailure, "cannot open head checkpoint: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParseError, std::string("bad head checkpoint: ") + e.what());
  }
  if (!doc.is_object() || doc.value("version", 0) != 1) {
    throw Error(ErrorKind::kSchemaMismatch, "unsupported head checkpoint version");
  }
  ProjectionHead head;
  try {
    head.d_in = doc.at("d_in").get<std::size_t>();
    head.d_out = doc.at("d_out").get<std::size_t>();
    head.weight = doc.at("weight").get<std::vector<double>>();
    head.bias = doc.at("bias").get<Vec>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParseError, std::string("bad head checkpoint: ") + e.what());
  }
  if (head.weight.size() != head.d_in * head.d_out || head.bias.size() != head.d_out) {
    throw Error(ErrorKind::kSchemaMismatch, "head checkpoint shapes are inconsistent");
  }
  return head;
}

}  // namespace opendet::trainer
