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

#ifndef OPENDET_MEMORY_HPP
#define OPENDET_MEMORY_HPP

#include <string>
#include <unordered_set>
#include <vector>

#include "opendet/types.hpp"

namespace opendet {

struct MemoryEntry {
  ObjectRecord object;
  EmbeddingRecord embedding;

  bool operator==(const MemoryEntry&) const = default;
};

/// Dual store of detector outputs: known-class detections with their
/// semantic labels, and unknown detections awaiting category discovery.
/// An object id never appears in both stores.
class MemoryBuffer {
 public:
  MemoryBuffer() = default;

  const std::vector<MemoryEntry>& known() const { return known_; }
  const std::vector<MemoryEntry>& working() const { return working_; }

  /// Embedding dimension; 0 while the buffer is empty.
  int dim() const { return dim_; }
  bool empty() const { return known_.empty() && working_.empty(); }
  std::size_t size() const { return known_.size() + working_.size(); }

  bool contains(const std::string& object_id) const {
    return ids_.count(object_id) != 0;
  }

  /// Appends one entry to the store selected by its tag. Validates the
  /// tag kind, id uniqueness, and embedding dimension.
  void append(ObjectRecord object, EmbeddingRecord embedding);

  bool operator==(const MemoryBuffer& other) const {
    return known_ == other.known_ && working_ == other.working_;
  }

 private:
  int dim_ = 0;
  std::vector<MemoryEntry> known_;
  std::vector<MemoryEntry> working_;
  std::unordered_set<std::string> ids_;
};

/// Routes detections into the buffer: KnownClass tags to the known store,
/// Unknown tags to the working store, order preserved within each store.
/// Every detection must have an embedding with the same object_id.
MemoryBuffer store_predictions(MemoryBuffer buffer,
                               const std::vector<ObjectRecord>& detections,
                               const std::vector<EmbeddingRecord>& embeddings);

/// Writes the buffer as JSONL: a header line {"version":1,"dim":d} followed
/// by one entry per line. Round-trips bit-exactly through load_memory.
void snapshot_memory(const MemoryBuffer& buffer, const std::string& path);

/// Reads a snapshot. When expected_dim > 0 the file's dimension must match.
MemoryBuffer load_memory(const std::string& path, int expected_dim = 0);

}  // namespace opendet

#endif  // OPENDET_MEMORY_HPP
