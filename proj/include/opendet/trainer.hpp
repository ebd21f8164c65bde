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

#ifndef OPENDET_TRAINER_HPP_
#define OPENDET_TRAINER_HPP_

#include <cstdint>
#include <deque>
#include <string>
#include <utility>
#include <vector>

#include "opendet/memory.hpp"
#include "opendet/vecmath.hpp"

namespace opendet::trainer {

/// Single linear layer mapping raw features to the embedding space.
struct ProjectionHead {
  std::size_t d_in = 0;
  std::size_t d_out = 0;
  std::vector<double> weight;  // row-major, d_out x d_in
  Vec bias;                    // d_out

  bool operator==(const ProjectionHead&) const = default;
};

/// Fixed-capacity FIFO of projected key vectors serving as negatives.
class KeyQueue {
 public:
  explicit KeyQueue(std::size_t capacity);

  /// Appends a key; evicts the oldest entry when at capacity.
  void push(Vec key);

  /// Copies the entries oldest-first, for use as a negative set.
  std::vector<Vec> snapshot() const;

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return entries_.empty(); }

 private:
  std::size_t capacity_;
  std::deque<Vec> entries_;
};

struct TrainConfig {
  int epochs = 10;
  double learning_rate = 0.015;
  double sgd_momentum = 0.9;
  double temperature = 1.0;
  double key_momentum = 0.999;  // momentum copy used to project keys
  int batch_size = 64;
  double mix_alpha = 1.0;          // Beta(alpha, alpha) mixing coefficient
  std::size_t queue_capacity = 4096;
  std::uint64_t seed = 0;
};

struct TrainStats {
  std::vector<double> epoch_mean_loss;  // one entry per epoch
  double final_loss = 0.0;
};

/// Deterministic head with entries drawn uniform(-1/sqrt(d_in), 1/sqrt(d_in)).
ProjectionHead init_head(std::size_t d_in, std::size_t d_out, std::uint64_t seed);

/// Projects and L2-normalizes one feature; pre-activations with norm below
/// 1e-12 map to the first standard basis vector.
Vec encode_one(const ProjectionHead& head, const Vec& feature);

/// encode_one over a whole feature list.
std::vector<Vec> encode(const ProjectionHead& head, const std::vector<Vec>& features);

/// Contrastive refinement over every embedding in the buffer (known and
/// working alike; tags are never consulted). Each sample is expanded into two
/// augmented views, mixed within the pair, projected through the live head
/// (query) and a momentum copy (key), and scored with the contrastive loss
/// against the current queue. Deterministic for a fixed config.
std::pair<ProjectionHead, TrainStats> train(const ProjectionHead& head,
                                            const MemoryBuffer& buffer,
                                            const TrainConfig& cfg);

/// Checkpoint I/O; round trips are bit-exact.
void save_head(const ProjectionHead& head, const std::string& path);
ProjectionHead load_head(const std::string& path);

}  // namespace opendet::trainer

#endif  // OPENDET_TRAINER_HPP_
